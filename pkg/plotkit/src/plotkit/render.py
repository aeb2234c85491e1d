"""Render figure recipes from scenario tables.

Each renderer extracts named columns, assembles the plotted data series
(written alongside the image as a JSON sidecar for byte-stability checks),
and draws the figure.  SVG output is made deterministic via a fixed hash
salt and stripped timestamps.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from plotkit.recipes import FigureRecipe
from plotkit.tables import PlotkitError, SchemaError, read_table, require_columns

plt.rcParams["svg.hashsalt"] = "plotkit"

_SPECTRUM_LINES = (
    ("r_tm", "reflectance (transfer matrix)", "#c23b22", "-"),
    ("t_tm", "transmittance (transfer matrix)", "#1f77b4", "-"),
    ("r_eq8", "reflectance (closed form)", "#7f3fbf", "--"),
    ("r_spin", "reflectance (spin model)", "#c23b22", ""),
    ("t_spin", "transmittance (spin model)", "#1f77b4", ""),
)


def _series_entry(x, y, label, style):
    return {
        "label": label,
        "style": style,
        "x": [format(v, ".17g") for v in np.asarray(x, float)],
        "y": [format(v, ".17g") for v in np.asarray(y, float)],
    }


def _render_spectrum(recipe, tables, ax):
    series = []
    for path, (meta, cols) in tables.items():
        require_columns(path, cols, ["delta"])
        found = False
        for name, label, color, style in _SPECTRUM_LINES:
            if name not in cols:
                continue
            found = True
            group_vals = cols.get("gamma_deph")
            groups = np.unique(group_vals) if group_vals is not None else [None]
            for g in groups:
                mask = slice(None) if g is None else group_vals == g
                x = cols["delta"][mask]
                y = cols[name][mask]
                tag = label if g is None else f"{label}, dephasing {g:g}"
                if style:
                    ax.plot(x, y, style, color=color, lw=1.2, label=tag, alpha=0.9)
                else:
                    ax.plot(x, y, "o", ms=2.5, mfc="none", color=color, label=tag, alpha=0.9)
                series.append(_series_entry(x, y, tag, style or "o"))
        if not found:
            raise SchemaError(
                f"{path}: no spectrum columns found; expected one of "
                f"{[n for n, *_ in _SPECTRUM_LINES]}"
            )
    ax.set_ylim(-0.02, 1.05)
    ax.legend(fontsize=7, loc="best")
    return series


def _pivot(cols, path):
    require_columns(path, cols, ["coupling_j", "delta_offset", "g2"])
    js = np.unique(cols["coupling_j"])
    offs = np.unique(cols["delta_offset"])
    grid = np.full((len(js), len(offs)), np.nan)
    contour = np.full_like(grid, np.nan)
    for j, off, g2, rc in zip(
        cols["coupling_j"], cols["delta_offset"], cols["g2"], cols.get("r_conditional_tm", np.zeros_like(cols["g2"]))
    ):
        a = np.searchsorted(js, j)
        b = np.searchsorted(offs, off)
        grid[a, b] = g2
        contour[a, b] = rc
    if np.any(np.isnan(grid)):
        raise SchemaError(f"{path}: g2 map grid is not complete")
    return js, offs, grid, contour


def _render_g2map(recipe, tables, ax):
    if len(tables) != 1:
        raise PlotkitError("g2map figures take exactly one input table")
    path, (meta, cols) = next(iter(tables.items()))
    js, offs, grid, contour = _pivot(cols, path)
    level = float(recipe.options.get("contour_level", 0.8))
    mesh = ax.pcolormesh(offs, js, grid, shading="nearest", cmap="viridis", vmin=0.0)
    plt.colorbar(mesh, ax=ax, label="g2(0)")
    if np.all(np.isfinite(contour)) and contour.max() > level and len(js) > 1:
        ax.contour(offs, js, contour, levels=[level], colors="white", linewidths=1.2)
    series = [
        _series_entry(offs, js, "axes", "grid"),
        {
            "label": "g2",
            "style": "heatmap",
            "x": [format(v, ".17g") for v in offs],
            "y": [format(v, ".17g") for row in grid for v in row],
        },
    ]
    return series


def _render_pulse(recipe, tables, ax):
    if len(tables) != 1:
        raise PlotkitError("pulse figures take exactly one input table")
    path, (meta, cols) = next(iter(tables.items()))
    require_columns(path, cols, ["t", "i_r_gate", "i_t_gate", "i_r_bg", "i_t_bg"])
    amp = float(meta.get("amplitude", 1.0)) or 1.0
    norm = amp * amp
    t = cols["t"]
    series = []
    lines = [
        ((cols["i_r_gate"] - cols["i_r_bg"]) / norm, "reflected, gate stored", "#c23b22", "-"),
        ((cols["i_t_gate"] - cols["i_t_bg"]) / norm, "transmitted, gate stored", "#1f77b4", "-"),
    ]
    if "i_r_nogate" in cols:
        lines.append((cols["i_r_nogate"] / norm, "reflected, no gate", "#c23b22", "--"))
        lines.append((cols["i_t_nogate"] / norm, "transmitted, no gate", "#1f77b4", "--"))
    if "env_sq" in cols:
        lines.append((cols["env_sq"] / norm, "input envelope", "#555555", ":"))
    for y, label, color, style in lines:
        ax.plot(t, y, style, color=color, lw=1.1, label=label)
        series.append(_series_entry(t, y, label, style))
    ax.legend(fontsize=7, loc="best")
    return series


def _render_scaling(recipe, tables, ax):
    series = []
    for path, (meta, cols) in tables.items():
        require_columns(path, cols, ["n_atoms", "gamma_wg"])
        group_vals = cols.get("gamma_rel")
        groups = np.unique(group_vals) if group_vals is not None else [None]
        for g in groups:
            mask = slice(None) if g is None else group_vals == g
            n = cols["n_atoms"][mask]
            rate = cols["gamma_wg"][mask]
            tag = "decay rate" if g is None else f"dephasing {g:g} of guided rate"
            ax.loglog(n, rate, "o", ms=4, label=tag)
            series.append(_series_entry(n, rate, tag, "o"))
            alpha_key = f"alpha_{g:g}" if g is not None else "alpha"
            if alpha_key in meta:
                alpha = float(meta[alpha_key])
                ref = rate[0] * (n / n[0]) ** (-alpha)
                ax.loglog(n, ref, "-", lw=1.0, alpha=0.7, label=f"fit N^-{alpha:.2f}")
                series.append(_series_entry(n, ref, f"fit alpha={alpha:.3f}", "-"))
    ax.legend(fontsize=7, loc="best")
    return series


def _render_popmap(recipe, tables, ax):
    if len(tables) != 1:
        raise PlotkitError("popmap figures take exactly one input table")
    path, (meta, cols) = next(iter(tables.items()))
    require_columns(path, cols, ["m", "n", "weight"])
    size = int(max(cols["m"].max(), cols["n"].max()))
    grid = np.zeros((size, size))
    grid[cols["m"].astype(int) - 1, cols["n"].astype(int) - 1] = cols["weight"]
    mesh = ax.imshow(grid, origin="lower", cmap="inferno", extent=(0.5, size + 0.5, 0.5, size + 0.5))
    plt.colorbar(mesh, ax=ax, label="double-storage population")
    return [
        {
            "label": "popmap",
            "style": "heatmap",
            "x": [str(size)],
            "y": [format(v, ".17g") for v in grid.ravel()],
        }
    ]


_RENDERERS = {
    "spectrum": _render_spectrum,
    "g2map": _render_g2map,
    "pulse": _render_pulse,
    "scaling": _render_scaling,
    "popmap": _render_popmap,
}


def render(recipe: FigureRecipe) -> str:
    """Render one recipe; returns the image path written.

    A JSON sidecar ``<out>.series.json`` records every plotted data series
    with full precision; re-rendering identical inputs reproduces it (and
    the SVG) byte for byte.
    """
    paths = recipe.resolve_inputs()
    tables = {}
    for path in paths:
        tables[path] = read_table(path)

    fig, ax = plt.subplots(figsize=(5.0, 3.4), dpi=120)
    try:
        series = _RENDERERS[recipe.kind](recipe, tables, ax)
        if recipe.title:
            ax.set_title(recipe.title, fontsize=9)
        ax.set_xlabel(recipe.xlabel or _default_xlabel(recipe.kind), fontsize=8)
        ax.set_ylabel(recipe.ylabel or _default_ylabel(recipe.kind), fontsize=8)
        ax.tick_params(labelsize=7)
        fig.tight_layout()
        out = Path(recipe.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out, metadata=_strip_metadata(out.suffix))
    finally:
        plt.close(fig)

    sidecar = Path(str(recipe.out) + ".series.json")
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump({"kind": recipe.kind, "series": series}, fh, sort_keys=True, indent=1)
    return str(recipe.out)


def _strip_metadata(suffix: str):
    if suffix == ".svg":
        return {"Date": None}
    if suffix == ".png":
        return {"Software": None}
    return None


def _default_xlabel(kind: str) -> str:
    return {
        "spectrum": "probe detuning (free-space rate units)",
        "g2map": "detuning from linear resonance",
        "pulse": "time (inverse free-space rate)",
        "scaling": "atom number",
        "popmap": "atom index n",
    }[kind]


def _default_ylabel(kind: str) -> str:
    return {
        "spectrum": "reflectance / transmittance",
        "g2map": "exchange coupling",
        "pulse": "intensity / peak input",
        "scaling": "guided decay rate",
        "popmap": "atom index m",
    }[kind]
