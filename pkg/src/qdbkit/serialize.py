"""JSON encoding of the package's objects.

Complex matrices are nested row-major lists of ``[re, im]`` pairs.  Outcome
labels may be tuples; they are written as JSON arrays inside alphabets and,
where a label must be an object key, as its compact JSON text.  Every
``*_to_json`` output is accepted by the matching ``*_from_json`` and
re-encodes to identical text.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from .cds import CdsParams
from .channel import CPMap, QuantumChannel, state_matrix
from .errors import BadParameters, ThetaNotInvolution
from .instrument import POVM, Instrument, Reversal
from .markov import MarkovChain
from .symmetry import SymmetryOp


def matrix_to_json(M) -> list:
    M = np.asarray(M, dtype=np.complex128)
    # adding 0.0 turns -0.0 into 0.0 so that equal matrices encode identically
    return [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in row] for row in M]


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise BadParameters("matrix must be a nested list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(data) -> complex:
    re, im = data
    return complex(float(re), float(im))


def label_to_json(label) -> Any:
    if isinstance(label, tuple):
        return [label_to_json(v) for v in label]
    if isinstance(label, (np.integer,)):
        return int(label)
    return label


def label_from_json(data) -> Any:
    if isinstance(data, list):
        return tuple(label_from_json(v) for v in data)
    return data


def label_key(label) -> str:
    """Object key for a label: strings stay as they are, others become JSON text."""
    if isinstance(label, str):
        return label
    return json.dumps(label_to_json(label), separators=(",", ":"))


def label_from_key(key: str, alphabet) -> Any:
    lookup = {label_key(a): a for a in alphabet}
    if key not in lookup:
        raise BadParameters(f"unknown label key {key!r}")
    return lookup[key]


def channel_to_json(channel: CPMap) -> dict:
    return {"dim": channel.dim, "kraus": [matrix_to_json(K) for K in channel.kraus]}


def channel_from_json(data: dict, check: bool = True) -> QuantumChannel:
    K = np.array([matrix_from_json(k) for k in data["kraus"]])
    if K.shape[1:] != (data["dim"], data["dim"]):
        raise BadParameters("Kraus operators do not match the declared dimension")
    return QuantumChannel(K, check=check)


def state_to_json(rho) -> dict:
    rho = state_matrix(rho)
    return {"dim": rho.shape[0], "rho": matrix_to_json(rho)}


def state_from_json(data: dict) -> np.ndarray:
    return state_matrix(matrix_from_json(data["rho"]))


def symmetry_to_json(J: SymmetryOp) -> dict:
    return {"dim": J.dim, "antiunitary": bool(J.antiunitary), "U": matrix_to_json(J.U)}


def symmetry_from_json(data: dict) -> SymmetryOp:
    J = SymmetryOp(matrix_from_json(data["U"]), bool(data["antiunitary"]))
    if J.dim != data["dim"]:
        raise BadParameters("symmetry matrix does not match the declared dimension")
    return J


def instrument_to_json(instr: Instrument) -> dict:
    return {
        "dim": instr.dim,
        "alphabet": [label_to_json(a) for a in instr.alphabet],
        "maps": {
            label_key(a): [matrix_to_json(K) for K in instr.maps[a].kraus]
            for a in instr.alphabet
        },
    }


def instrument_from_json(data: dict, check: bool = True) -> Instrument:
    alphabet = [label_from_json(a) for a in data["alphabet"]]
    maps = {}
    for key, ks in data["maps"].items():
        a = label_from_key(key, alphabet)
        maps[a] = CPMap(np.array([matrix_from_json(k) for k in ks]))
    instr = Instrument(alphabet, maps, check=check)
    if instr.dim != data["dim"]:
        raise BadParameters("instrument maps do not match the declared dimension")
    return instr


def povm_to_json(povm: POVM) -> dict:
    return {
        "dimE": povm.dim_e,
        "alphabet": [label_to_json(a) for a in povm.alphabet],
        "elements": {label_key(a): matrix_to_json(povm.elements[a]) for a in povm.alphabet},
    }


def povm_from_json(data: dict) -> POVM:
    if "alphabet" in data:
        alphabet = [label_from_json(a) for a in data["alphabet"]]
    else:
        alphabet = list(data["elements"])
    elements = {label_from_key(k, alphabet): matrix_from_json(v) for k, v in data["elements"].items()}
    povm = POVM(alphabet, elements)
    if povm.dim_e != data["dimE"]:
        raise BadParameters("effects do not match the declared dimension")
    return povm


def reversal_to_json(theta: Reversal, alphabet=None) -> dict:
    alphabet = list(theta.mapping) if alphabet is None else list(alphabet)
    return {
        "alphabet": [label_to_json(a) for a in alphabet],
        "theta": {label_key(a): label_to_json(theta(a)) for a in alphabet},
    }


def reversal_from_json(data: dict) -> Reversal:
    """Reversal from JSON; it must be an involution."""
    if "alphabet" in data:
        alphabet = [label_from_json(a) for a in data["alphabet"]]
    else:
        alphabet = list(data["theta"])
    mapping = {label_from_key(k, alphabet): label_from_json(v) for k, v in data["theta"].items()}
    theta = Reversal(mapping)
    if not theta.is_involution():
        raise ThetaNotInvolution("theta o theta != id")
    return theta


def family_to_json(params: CdsParams) -> dict:
    return {
        "d": params.d,
        "a0": params.a0,
        "x": list(params.x),
        "eta": [complex_to_json(z) for z in params.eta],
        "antiunitary_K": bool(params.antiunitary_K),
    }


def family_from_json(data: dict) -> CdsParams:
    return CdsParams(
        d=int(data["d"]),
        a0=int(data["a0"]),
        x=tuple(data["x"]),
        eta=tuple(complex_from_json(z) for z in data["eta"]),
        antiunitary_K=bool(data.get("antiunitary_K", True)),
    )


def chain_to_json(chain: MarkovChain) -> dict:
    return {"P": chain.P.tolist(), "pi": chain.pi.tolist()}


def chain_from_json(data: dict) -> MarkovChain:
    return MarkovChain(np.asarray(data["P"], dtype=float), data.get("pi"))


def dumps(data: dict) -> str:
    """Canonical JSON text used for files and round-trip comparisons."""
    return json.dumps(data, indent=1, sort_keys=False)


def load(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
