"""plotkit command line: render figures from recipe files."""

from __future__ import annotations

import argparse
import sys

from plotkit.recipes import load_recipe
from plotkit.render import render
from plotkit.tables import PlotkitError, SchemaError


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plotkit", description="Regenerate figures from wqed tables")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render a figure recipe")
    p.add_argument("--recipe", required=True, help="YAML figure recipe")
    args = parser.parse_args(argv)

    try:
        recipe = load_recipe(args.recipe)
        out = render(recipe)
    except SchemaError as exc:
        print(f"plotkit: schema error: {exc}", file=sys.stderr)
        return 2
    except (PlotkitError, OSError) as exc:
        print(f"plotkit: error: {exc}", file=sys.stderr)
        return 1
    print(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
