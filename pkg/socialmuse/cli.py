"""`socialmuse <train|recommend|simulate|report> [--config file.json] [flags]`

A `--config` JSON file supplies defaults for the subcommand's arguments; flags given on the
command line win.
"""
import argparse
import json
import os
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence, Type, TypeVar

import dacite
import tyro

from socialmuse.utils.errors import InvalidConfig, InvalidInput, MissingVocabulary, NotFound, NotReady, SchemaError

T = TypeVar("T")

DATA_DIR_ENV = "SOCIALMUSE_DATA_DIR"
EXIT_DOMAIN_ERROR = 2

_DOMAIN_ERRORS = (
    FileNotFoundError,
    InvalidConfig,
    InvalidInput,
    MissingVocabulary,
    NotFound,
    NotReady,
    SchemaError,
)


def data_dir(*parts: str) -> Optional[Path]:
    """Path under $SOCIALMUSE_DATA_DIR, or None when the variable is unset."""
    root = os.environ.get(DATA_DIR_ENV)
    return Path(root, *parts) if root else None


def load_config(cls: Type[T], path: str) -> T:
    if not Path(path).exists():
        raise FileNotFoundError(f"config file {path} does not exist")
    with open(path, "r") as f:
        try:
            values = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON ({e.msg})", path, e.lineno) from None
    values["config"] = path
    try:
        return dacite.from_dict(data_class=cls, data=values, config=dacite.Config(strict=True, type_hooks={float: float}))
    except dacite.DaciteError as e:
        raise InvalidConfig(f"{path}: {e}") from None


def parse(cls: Type[T], argv: Optional[Sequence[str]] = None, prog: Optional[str] = None) -> T:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    default = None
    if known.config is not None:
        try:
            default = load_config(cls, known.config)
        except _DOMAIN_ERRORS as e:
            fail(e)
    return tyro.cli(cls, args=argv, default=default, prog=prog)


def fail(error: Exception) -> None:
    print(f"error: {error}", file=sys.stderr)
    sys.exit(EXIT_DOMAIN_ERROR)


def run(main: Callable[[T], object], args: T) -> None:
    """Call `main`, turning domain errors into a one-line message and exit code 2."""
    try:
        main(args)
    except _DOMAIN_ERRORS as e:
        fail(e)


def main(argv: Optional[Sequence[str]] = None) -> None:
    from socialmuse.scripts import recommend, report, simulate, train

    commands = dict(train=train, recommend=recommend, simulate=simulate, report=report)
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in commands:
        print(f"usage: socialmuse {{{','.join(commands)}}} [--config FILE] [flags]", file=sys.stderr)
        sys.exit(EXIT_DOMAIN_ERROR)
    module = commands[argv[0]]
    args = parse(module.Args, argv[1:], prog=f"socialmuse {argv[0]}")
    run(module.main, args)


if __name__ == "__main__":
    main()
