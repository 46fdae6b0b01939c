"""
Command line for the hsdnet pipeline.

    hsdnet train-base --config run.cfg --out runs/a
    hsdnet iscv --out runs/a
    hsdnet decompose --out runs/a
    ...

Each subcommand reads earlier artifacts from ``--out`` and writes its own.
"""

import json
import sys
from pathlib import Path
from typing import Annotated, Optional

import click
import typer

from . import pipeline
from .config import settings
from .errors import HsdnetError
from .pipeline_config import PipelineConfig, parse_config, write_config
from .utils.logger import get_logger

logger = get_logger(__name__)

app = typer.Typer(
    name="hsdnet",
    help="Decompose a trained chain CNN into a class-subset tree and extract subnetworks.",
    add_completion=False,
    no_args_is_help=True,
)

ConfigOpt = Annotated[
    Optional[Path], typer.Option("--config", help="Flat key = value pipeline config.")
]
OutOpt = Annotated[Path, typer.Option("--out", help="Artifact directory.")]
SeedOpt = Annotated[Optional[int], typer.Option("--seed", min=0, help="Overrides the config seed.")]
SubsetOpt = Annotated[
    Optional[str], typer.Option("--subset", help="Comma-separated class ids, e.g. 0,3,5.")
]


def _parse_ids(text: str, what: str) -> list[int]:
    try:
        ids = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"{what} must be comma-separated integers, got {text!r}") from e
    if not ids:
        raise typer.BadParameter(f"{what} is empty")
    return ids


def _load(config: Optional[Path], seed: Optional[int]) -> PipelineConfig:
    cfg = parse_config(config) if config is not None else PipelineConfig()
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": seed})
    return cfg


def _subset(text: Optional[str]) -> Optional[list[int]]:
    return _parse_ids(text, "--subset") if text is not None else None


@app.callback()
def _startup() -> None:
    settings.display()


@app.command("init-config")
def init_config(path: Annotated[Path, typer.Argument(help="Where to write the default config.")]) -> None:
    """Write the default pipeline configuration."""
    write_config(PipelineConfig(), path)
    typer.echo(str(path))


@app.command("train-base")
def train_base(config: ConfigOpt = None, out: OutOpt = Path("out"), seed: SeedOpt = None) -> None:
    """Train the conventional chain network."""
    chain = pipeline.train_base(_load(config, seed), out)
    typer.echo(f"chain: {chain.depth} conv layers -> {pipeline.artifact_path(out, 'chain')}")


@app.command("iscv")
def iscv(
    config: ConfigOpt = None,
    out: OutOpt = Path("out"),
    seed: SeedOpt = None,
    split: Annotated[
        Optional[str], typer.Option("--split", help="Measure on 'train' (default) or 'test'.")
    ] = None,
) -> None:
    """Compute impact score class vectors for every conv layer."""
    cfg = _load(config, seed)
    if split is not None:
        if split not in ("train", "test"):
            raise typer.BadParameter(f"--split must be train or test, got {split!r}")
        cfg = cfg.model_copy(update={"iscv_split": split})
    pipeline.compute_iscv(cfg, out)
    typer.echo(str(pipeline.artifact_path(out, "iscv")))


@app.command("decompose")
def decompose(config: ConfigOpt = None, out: OutOpt = Path("out"), seed: SeedOpt = None) -> None:
    """Build the tree layout from the chain and its Iscv."""
    tree = pipeline.decompose(_load(config, seed), out)
    leaves = [list(leaf.class_set) for leaf in tree.leaves()]
    typer.echo(f"{len(tree.nodes)} nodes, {len(leaves)} leaves: {leaves}")


@app.command("transfer")
def transfer(config: ConfigOpt = None, out: OutOpt = Path("out"), seed: SeedOpt = None) -> None:
    """Fill the tree's edges with sliced chain filters."""
    pipeline.transfer(_load(config, seed), out)
    typer.echo(str(pipeline.artifact_path(out, "tree_transferred")))


@app.command("finetune")
def finetune(config: ConfigOpt = None, out: OutOpt = Path("out"), seed: SeedOpt = None) -> None:
    """Fine-tune the transferred tree."""
    pipeline.finetune_tree(_load(config, seed), out)
    typer.echo(str(pipeline.artifact_path(out, "tree")))


@app.command("eval")
def evaluate(
    config: ConfigOpt = None, out: OutOpt = Path("out"), seed: SeedOpt = None, subset: SubsetOpt = None
) -> None:
    """Test accuracy of the chain and the tree, optionally restricted to a class subset."""
    result = pipeline.evaluate_models(_load(config, seed), out, _subset(subset))
    typer.echo(json.dumps(result, sort_keys=True))


@app.command("subnet")
def subnet(
    config: ConfigOpt = None, out: OutOpt = Path("out"), seed: SeedOpt = None, subset: SubsetOpt = None
) -> None:
    """Extract the subnetwork serving --subset."""
    if subset is None:
        raise typer.BadParameter("subnet needs --subset")
    sub = pipeline.extract(_load(config, seed), out, _parse_ids(subset, "--subset"))
    typer.echo(f"{len(sub.nodes)} nodes, classes {list(sub.covered_classes())}")


@app.command("sweep")
def sweep(
    config: ConfigOpt = None,
    out: OutOpt = Path("out"),
    seed: SeedOpt = None,
    cardinalities: Annotated[
        Optional[str], typer.Option("--cardinalities", help="Comma-separated subset sizes.")
    ] = None,
    combos: Annotated[
        Optional[int], typer.Option("--combos", min=1, help="Subsets sampled per size.")
    ] = None,
) -> None:
    """Compare subnetwork and full-tree accuracy over sampled class subsets."""
    sizes = _parse_ids(cardinalities, "--cardinalities") if cardinalities is not None else None
    typer.echo(str(pipeline.sweep(_load(config, seed), out, sizes, combos)))


@app.command("metrics")
def metrics(
    config: ConfigOpt = None, out: OutOpt = Path("out"), seed: SeedOpt = None, subset: SubsetOpt = None
) -> None:
    """Compression rate, saved computations and speedup against the chain."""
    payload = pipeline.metrics(_load(config, seed), out, _subset(subset))
    typer.echo(json.dumps(payload["report"], sort_keys=True))


@app.command("export-dot")
def export_dot(config: ConfigOpt = None, out: OutOpt = Path("out"), seed: SeedOpt = None) -> None:
    """Write the most advanced tree as Graphviz DOT."""
    path = pipeline.write_dot(_load(config, seed), out)
    typer.echo(str(path))


def run_command(argv: list[str]) -> int:
    """Run one subcommand; 0 on success, 1 on a pipeline error, 2 on usage or internal errors."""
    command = typer.main.get_command(app)
    try:
        result = command.main(args=list(argv), prog_name="hsdnet", standalone_mode=False)
    except (HsdnetError, ValueError, FileNotFoundError) as e:
        message = str(e).splitlines()[0] if str(e) else type(e).__name__
        logger.debug(f"Command failed: {e!r}")
        print(f"error: {message}", file=sys.stderr)
        return 1
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.exceptions.Abort:
        print("aborted", file=sys.stderr)
        return 1
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return 2
    return result if isinstance(result, int) else 0


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


__all__ = ["app", "main", "run_command"]
