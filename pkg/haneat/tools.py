from dataclasses import asdict, replace
from typing import Any, Dict, List, Optional

from mcp.server.fastmcp import FastMCP
from starlette.concurrency import run_in_threadpool

from .activation import hidden_catalog
from .config import EvolutionConfig, Settings, split_overrides
from .data import fixture_targets
from .errors import UsageError
from .evolution import run
from .experiment import ExperimentSpec, run_experiment
from .genome import from_dict, to_dict
from .network import compile_genome, evaluate_batch


def describe_activations() -> Dict[str, Any]:
    return {"hidden": [kind.label for kind in hidden_catalog()], "io": "linear"}


def config_defaults() -> Dict[str, Any]:
    payload = asdict(EvolutionConfig())
    payload["catalog"] = [kind.label for kind in EvolutionConfig().catalog]
    return payload


def evaluate_document(genome: Dict[str, Any], inputs: List[List[float]]) -> Dict[str, Any]:
    phenotype = compile_genome(from_dict(genome))
    outputs = evaluate_batch(phenotype, inputs)
    return {"outputs": outputs.tolist()}


def fixture_run(
    name: str,
    generations: int = 100,
    population: int = 50,
    seed: int = 0,
    catalog: Optional[str] = None,
) -> Dict[str, Any]:
    data = fixture_targets(name)
    overrides: Dict[str, Any] = {"max_generations": generations, "population_size": population, "seed": seed}
    if catalog:
        overrides["catalog"] = catalog
    champion, metrics = run(EvolutionConfig().with_overrides(**overrides), data, data)
    return {"fixture": name, **metrics.final(champion), "champion": to_dict(champion)}


def experiment_from_mapping(mapping: Dict[str, Any], cfg: Settings) -> ExperimentSpec:
    """Flat mapping with config-file keys -> validated spec; output goes under the server's out_dir."""
    evolution, spec = split_overrides(mapping, "tool arguments")
    if "out_dir" in spec:
        raise UsageError("out_dir is fixed by the server (HANEAT_OUT_DIR).")
    return replace(
        ExperimentSpec(out_dir=cfg.out_dir),
        evolution=EvolutionConfig().with_overrides(**evolution),
        **spec,
    ).validate()


def register_tools(mcp: FastMCP, cfg: Settings) -> None:
    """Register the experiment tools with FastMCP."""

    @mcp.tool()
    async def list_activations() -> Dict[str, Any]:
        """
        Purpose: Show the activation catalog.
        Inputs: none.
        Outputs: dict with `hidden` (kinds a hidden node may carry, in gene-index order) and `io` (always linear).
        """
        return describe_activations()

    @mcp.tool()
    async def default_config() -> Dict[str, Any]:
        """
        Purpose: Return every EvolutionConfig field with its default value.
        Inputs: none.
        Outputs: flat dict; the same keys are accepted by `run_experiment` and by --config files.
        """
        return config_defaults()

    @mcp.tool()
    async def evaluate_genome(genome: Dict[str, Any], inputs: List[List[float]]) -> Dict[str, Any]:
        """
        Purpose: Run a genome document (e.g. a champion.json artifact) on input rows.
        Inputs:
        - genome (dict): genome file format with `nodes`, `connections`, `fitness`.
        - inputs (list[list[float]]): one row per sample, one value per input node.
        Outputs: dict with `outputs`, one row per sample.
        Behavior: compiles the feedforward plan; a cyclic genome is rejected.
        """
        return evaluate_document(genome, inputs)

    @mcp.tool()
    async def run_fixture(
        name: str,
        generations: int = 100,
        population: int = 50,
        seed: int = 0,
        catalog: Optional[str] = None,
    ) -> Dict[str, Any]:
        """
        Purpose: Evolve a network on one 1-D fixture target.
        Inputs:
        - name (str): gaussian_1d, sigmoid_1d, composite_fig3 or multitarget_fig4.
        - generations (int), population (int), seed (int).
        - catalog (str|None): comma-separated hidden activations; default all four.
        Outputs: final train MSE, size counts and the champion genome.
        Behavior: runs in a worker thread; train and test set are the whole fixture curve.
        """
        return await run_in_threadpool(fixture_run, name, generations, population, seed, catalog)

    @mcp.tool(name="run_experiment")
    async def run_experiment_tool(spec: Dict[str, Any]) -> List[Dict[str, Any]]:
        """
        Purpose: Run a cross-validated experiment.
        Inputs:
        - spec (dict): flat keys of ExperimentSpec (dataset, mode, activation, folds, replicates, seed, rates)
          and EvolutionConfig (see `default_config`).
        Outputs: one summary per arm (median and quartiles of train/test MSE, median sizes, activation histogram).
        Behavior: blocks until all splits finish; artifacts are written under the server's output directory.
        """
        experiment = experiment_from_mapping(spec, cfg)
        result = await run_in_threadpool(run_experiment, experiment)
        return [arm.to_dict() for arm in result.arms]
