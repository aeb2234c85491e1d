"""Figure recipes: which inputs feed which figure kind."""

from __future__ import annotations

import glob
from dataclasses import dataclass, field

import yaml

from plotkit.tables import PlotkitError

FIGURE_KINDS = ("spectrum", "g2map", "pulse", "scaling", "popmap")


@dataclass
class FigureRecipe:
    kind: str
    inputs: list
    out: str
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    options: dict = field(default_factory=dict)

    def resolve_inputs(self) -> list:
        paths = []
        for pattern in self.inputs:
            matched = sorted(glob.glob(pattern))
            if matched:
                paths.extend(matched)
            else:
                paths.append(pattern)  # literal path; missing files fail on read
        return paths


def recipe_from_dict(doc: dict) -> FigureRecipe:
    if not isinstance(doc, dict):
        raise PlotkitError("recipe document must be a mapping")
    kind = doc.get("kind")
    if kind not in FIGURE_KINDS:
        raise PlotkitError(f"unknown figure kind {kind!r}; expected one of {FIGURE_KINDS}")
    inputs = doc.get("inputs")
    if not inputs:
        raise PlotkitError("recipe needs a non-empty 'inputs' list")
    if isinstance(inputs, str):
        inputs = [inputs]
    out = doc.get("out")
    if not out:
        raise PlotkitError("recipe needs an 'out' image path")
    labels = doc.get("labels") or {}
    return FigureRecipe(
        kind=kind,
        inputs=list(inputs),
        out=str(out),
        title=doc.get("title", ""),
        xlabel=labels.get("x", ""),
        ylabel=labels.get("y", ""),
        options=doc.get("options") or {},
    )


def load_recipe(path) -> FigureRecipe:
    with open(path, "r", encoding="utf-8") as fh:
        return recipe_from_dict(yaml.safe_load(fh))
