"""
Scenario files
A scenario file stores the physical parameters and the seed only; the
channels are regenerated deterministically when it is loaded.
"""
import json
from pathlib import Path
from typing import Union

from .isac import IsacScenario, generate_isac_scenario
from .mimo import MimoNetwork, generate_mimo_network
from .utils import InvalidParams, stable_hash

SCENARIO_GENERATORS = {
    "isac": generate_isac_scenario,
    "mimo": generate_mimo_network,
}

Scenario = Union[IsacScenario, MimoNetwork]


def scenario_kind(scenario: Scenario) -> str:
    if isinstance(scenario, IsacScenario):
        return "isac"
    if isinstance(scenario, MimoNetwork):
        return "mimo"
    raise TypeError(f"Unsupported scenario type: {type(scenario).__name__}")


def scenario_document(scenario: Scenario) -> dict:
    """JSON document describing a scenario."""
    return {
        "kind": scenario_kind(scenario),
        "seed": scenario.seed,
        "params": scenario.params,
    }


def scenario_hash(scenario: Scenario) -> str:
    """Hash of the scenario document, independent of key order."""
    return stable_hash(scenario_document(scenario))


def save_scenario(scenario: Scenario, path) -> Path:
    """Write the scenario document as JSON."""
    path = Path(path)
    path.write_text(json.dumps(scenario_document(scenario), indent=2, sort_keys=True), encoding="utf-8")
    return path


def load_scenario(path) -> Scenario:
    """
    Rebuild a scenario from its file.

    Args:
        path: File written by save_scenario

    Returns:
        IsacScenario or MimoNetwork with regenerated channels
    """
    document = json.loads(Path(path).read_text(encoding="utf-8"))
    kind = document.get("kind")
    if kind not in SCENARIO_GENERATORS:
        raise InvalidParams(f"Unknown scenario kind: {kind}")
    return SCENARIO_GENERATORS[kind](document["params"], document["seed"])
