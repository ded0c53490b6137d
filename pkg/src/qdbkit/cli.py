"""Command-line front end.

Every subcommand prints ``key=value`` lines by default and one JSON document
with ``--json``.  Errors go to stderr and set the exit status: 2 for invalid
input or a failed validation, 3 for an exceeded resource cap and 4 for a
numerical failure.
"""

from __future__ import annotations

import sys

import click
import numpy as np

from . import cds, config, linalg, serialize
from . import instrument as instr_mod
from . import statistics as stats
from .channel import invariant_state, is_irreducible, maximal_cycle, stinespring
from .errors import BadParameters, QdbError
from .instrument import Reversal
from .markov import embed
from .pgfcs import PgfcsSpec, pgfcs_equal
from .symmetry import JFamily, is_admissible, qdb_check, search_qdb


# ----------------------------------------------------------------------------
# output helpers


def _flatten(prefix: str, value, out: list) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, list) and value and isinstance(value[0], (list, dict)):
        out.append(f"{prefix}=<{len(value)} entries>")
    elif isinstance(value, list) and value and all(isinstance(v, str) for v in value):
        for i, v in enumerate(value):
            out.append(f"{prefix}.{i}={v}")
    elif isinstance(value, list):
        out.append(f"{prefix}=" + ",".join(str(v) for v in value))
    else:
        out.append(f"{prefix}={value}")


def emit(report: dict, as_json: bool, out_path: str | None = None) -> None:
    """Print ``report`` and optionally save it as JSON."""
    text = serialize.dumps(report)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    if as_json:
        click.echo(text)
    else:
        lines: list = []
        _flatten("", report, lines)
        click.echo("\n".join(lines))


def _cplx(z) -> list:
    return serialize.complex_to_json(z)


def _floats(text: str | None):
    if text is None:
        return None
    return tuple(float(v) for v in text.split(",") if v.strip())


def _load_section(path: str, key: str) -> dict:
    """JSON object from ``path``, descending into ``key`` for report documents."""
    data = serialize.load(path)
    if key in data and isinstance(data[key], dict):
        return data[key]
    return data


def _channel_source(channel_path: str | None, preset: str | None, x: str | None, **kw):
    """Channel plus, for presets, their family parameters."""
    if preset is not None:
        params = cds.preset(preset, x=_floats(x), **kw)
        return cds.build(params), params
    if channel_path is None:
        raise BadParameters("give a channel file or --preset")
    return serialize.channel_from_json(_load_section(channel_path, "channel")), None


def _rho_or_invariant(rho_path: str | None, channel) -> tuple[np.ndarray, bool]:
    if rho_path is not None:
        return serialize.state_from_json(_load_section(rho_path, "rho")), False
    return invariant_state(channel).rho, True


json_option = click.option("--json", "as_json", is_flag=True, help="Print one JSON document.")
out_option = click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Also save the JSON document.")
preset_options = [
    click.option("--preset", type=click.Choice(cds.PRESETS), help="Named family member."),
    click.option("--x", "x", help="Comma-separated interior parameters."),
    click.option("--p", "p", type=int, default=4, show_default=True, help="table1: d = 3p."),
    click.option("--s", "s", type=float, default=0.3, show_default=True, help="table1: boundary parameter."),
    click.option("--b", "b", type=int, default=1, show_default=True, help="fig2b: tilt."),
]


def with_preset(f):
    for opt in reversed(preset_options):
        f = opt(f)
    return f


def _preset_kw(preset, p, s, b) -> dict:
    if preset in ("table1",):
        return {"p": p, "s": s}
    if preset == "fig2b":
        return {"b": b}
    return {}


# ----------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Detailed balance tools for quantum channels and instruments."""


@main.command("family")
@with_preset
@click.option("--d", "d", type=int, help="Dimension (without --preset).")
@click.option("--a0", type=int, help="Reflection offset (without --preset).")
@click.option("--eta", help="Phase exponents k_a for eta_a = exp(2 pi i k_a / d), comma-separated.")
@click.option("--unitary-K", "unitary_k", is_flag=True, help="Use a unitary instead of an anti-unitary J.")
@click.option("--tol", type=float, default=config.QDB_TOL, show_default=True)
@json_option
@out_option
def cmd_family(preset, x, p, s, b, d, a0, eta, unitary_k, tol, as_json, out_path):
    """Build a family member and analyse it."""
    if preset is not None:
        params = cds.preset(preset, x=_floats(x), **_preset_kw(preset, p, s, b))
    else:
        if d is None or a0 is None:
            raise BadParameters("give --preset or both --d and --a0")
        m = cds.interior_size(d, a0)
        xs = _floats(x) if x is not None else (0.5,) * m
        ks = _floats(eta) if eta is not None else (0.0,) * d
        phases = tuple(cds.root_of_unity(d, k) for k in ks)
        params = cds.CdsParams(d, a0, xs, phases, not unitary_k)
    channel = cds.build(params)
    rho = invariant_state(channel).rho
    J = cds.symmetry(params)
    pred = cds.predicted_qdb(params)
    irreducible = is_irreducible(channel)
    report = {
        "params": serialize.family_to_json(params),
        "channel": serialize.channel_to_json(channel),
        "symmetry": serialize.symmetry_to_json(J),
        "irreducible": irreducible,
        "period": maximal_cycle(channel).period if irreducible else None,
        "predicted_qdb": pred.holds,
        "predicted_eta": _cplx(pred.eta) if pred.holds else None,
    }
    adm = is_admissible(channel, rho, J)
    report["admissible"] = adm.admissible
    if adm.admissible:
        res = qdb_check(channel, rho, J, tol=tol)
        report.update(qdb_holds=res.holds, qdb_residual=res.residual, eta=_cplx(res.eta))
    emit(report, as_json, out_path)


@main.command("qdb")
@click.argument("channel_path", required=False, type=click.Path(exists=True, dir_okay=False))
@with_preset
@click.option("--rho", "rho_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--J", "j_path", type=click.Path(exists=True, dir_okay=False), help="Symmetry JSON.")
@click.option("--search", is_flag=True, help="Scan the structured symmetry family.")
@click.option("--kinds", default="unitary,antiunitary", show_default=True)
@click.option("--denominator", type=int, default=24, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--tol", type=float, default=config.QDB_TOL, show_default=True)
@json_option
@out_option
def cmd_qdb(channel_path, preset, x, p, s, b, rho_path, j_path, search, kinds, denominator, threads, tol, as_json, out_path):
    """Check detailed balance for a given symmetry or search for one."""
    channel, params = _channel_source(channel_path, preset, x, **_preset_kw(preset, p, s, b))
    rho, auto = _rho_or_invariant(rho_path, channel)
    report = {"rho_computed": auto}
    if auto:
        report["rho"] = serialize.state_to_json(rho)
    if search:
        family = JFamily(tuple(k.strip() for k in kinds.split(",")), denominator)
        result = search_qdb(channel, rho, family, tol=tol, threads=threads)
        report["found"] = [
            {"symmetry": serialize.symmetry_to_json(J), "eta": _cplx(e)} for J, e in result.found
        ]
        etas = sorted({(round(e.real, 9) + 0.0, round(e.imag, 9) + 0.0) for _, e in result.found})
        report["eta_values"] = [list(e) for e in etas]
        report["report"] = result.report.splitlines()
    else:
        if j_path is not None:
            J = serialize.symmetry_from_json(_load_section(j_path, "symmetry"))
        elif params is not None:
            J = cds.symmetry(params)
        else:
            raise BadParameters("give --J, --preset or --search")
        res = qdb_check(channel, rho, J, tol=tol)
        report.update(holds=res.holds, residual=res.residual, eta=_cplx(res.eta))
    emit(report, as_json, out_path)


@main.command("ep")
@click.argument("instrument_path", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--chain", "chain_path", type=click.Path(exists=True, dir_okay=False), help="Markov chain JSON to embed.")
@click.option("--rho", "rho_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--theta", "theta_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--nmax", type=int, default=6, show_default=True)
@click.option("--mc", is_flag=True, help="Monte Carlo estimate at n = nmax.")
@click.option("--samples", type=int, default=10_000, show_default=True)
@click.option("--seed", type=int, help="Required with --mc.")
@click.option("--word-cap", type=int, default=config.WORD_CAP, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Write the CSV here.")
def cmd_ep(instrument_path, chain_path, rho_path, theta_path, nmax, mc, samples, seed, word_cap, out_path):
    """Entropy production curve as CSV.

    The instrument file may be the output of ``instrument --build-iqdb``, in
    which case its state and reversal are used unless overridden.
    """
    theta = None
    rho = None
    if chain_path is not None:
        chain = serialize.chain_from_json(serialize.load(chain_path))
        instr, rho = embed(chain)
    elif instrument_path is not None:
        doc = serialize.load(instrument_path)
        instr = serialize.instrument_from_json(doc.get("instrument", doc))
        if "theta" in doc and isinstance(doc["theta"], dict) and "theta" in doc["theta"]:
            theta = serialize.reversal_from_json(doc["theta"])
        if "rho" in doc and isinstance(doc["rho"], dict):
            rho = serialize.state_from_json(doc["rho"])
    else:
        raise BadParameters("give an instrument file or --chain")
    if theta_path is not None:
        theta = serialize.reversal_from_json(_load_section(theta_path, "theta"))
    if theta is None:
        theta = Reversal.identity(instr.alphabet)
    if rho_path is not None:
        rho = serialize.state_from_json(_load_section(rho_path, "rho"))
    if rho is None:
        rho = invariant_state(instr.total()).rho
    if mc:
        if seed is None:
            raise BadParameters("--mc requires --seed")
        est = stats.ep_mc(instr, rho, theta, nmax, samples, seed)
        text = (
            "n,Ep_per_n_mc,stderr,samples,seed,infinite_flag\n"
            f"{est.n},{est.ep_per_n!r},{est.stderr!r},{est.samples},{seed},{int(est.infinite)}\n"
        )
    else:
        text = stats.ep_exact(instr, rho, theta, nmax, word_cap=word_cap).to_csv()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    click.echo(text, nl=False)


@main.command("instrument")
@click.argument("channel_path", required=False, type=click.Path(exists=True, dir_okay=False))
@with_preset
@click.option("--rho", "rho_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--J", "j_path", type=click.Path(exists=True, dir_okay=False), help="Symmetry JSON.")
@click.option("--build-iqdb", is_flag=True, required=True, help="Build a detailed-balanced instrument.")
@click.option("--base", type=click.Choice(["auto", "tetra", "ic"]), default="auto", show_default=True)
@json_option
@out_option
def cmd_instrument(channel_path, preset, x, p, s, b, rho_path, j_path, build_iqdb, base, as_json, out_path):
    """Instrument with a reversal from a channel in detailed balance."""
    channel, params = _channel_source(channel_path, preset, x, **_preset_kw(preset, p, s, b))
    rho, _ = _rho_or_invariant(rho_path, channel)
    if j_path is not None:
        J = serialize.symmetry_from_json(_load_section(j_path, "symmetry"))
    elif params is not None:
        J = cds.symmetry(params)
    else:
        raise BadParameters("give --J or --preset")
    base_povm = None
    if base != "auto":
        r = linalg.range_basis(instr_mod.psi_matrix(stinespring(channel), rho)).shape[1]
        base_povm = instr_mod.tetrahedral_povm() if base == "tetra" else instr_mod.build_ic_povm(r)
    built = instr_mod.build_iqdb_instrument(channel, rho, J, base=base_povm)
    ic = instr_mod.ic_test(built.povm)
    report = {
        "instrument": serialize.instrument_to_json(built.instrument),
        "theta": serialize.reversal_to_json(built.theta, built.instrument.alphabet),
        "rho": serialize.state_to_json(rho),
        "symmetry": serialize.symmetry_to_json(J),
        "outcomes": len(built.instrument.alphabet),
        "dilation_dim": built.dilation.dim_e,
        "ic_rank": ic.rank,
        "ic_complete": ic.complete,
        "involution_sign": built.involution.sign,
        "iqdb_residual": instr_mod.iqdb_check(built.instrument, rho, J, built.theta),
    }
    emit(report, as_json, out_path)


@main.command("povm")
@click.option("--ic", "n", type=int, required=True, help="Dimension of the IC-POVM.")
@json_option
@out_option
def cmd_povm(n, as_json, out_path):
    """Informationally complete POVM with 4n(n-1) outcomes."""
    povm = instr_mod.build_ic_povm(n)
    ic = instr_mod.ic_test(povm)
    report = {
        "povm": serialize.povm_to_json(povm),
        "outcomes": len(povm.alphabet),
        "rank": ic.rank,
        "ic_complete": ic.complete,
    }
    emit(report, as_json, out_path)


def _spec_from_file(path: str) -> PgfcsSpec:
    doc = serialize.load(path)
    channel = serialize.channel_from_json(doc.get("channel", doc))
    rho = serialize.state_from_json(doc["rho"]) if isinstance(doc.get("rho"), dict) else None
    return PgfcsSpec.from_channel(channel, rho)


@main.command("pgfcs")
@click.argument("spec1", type=click.Path(exists=True, dir_okay=False))
@click.argument("spec2", type=click.Path(exists=True, dir_okay=False))
@click.option("--tol", type=float, default=1e-8, show_default=True)
@json_option
@out_option
def cmd_pgfcs(spec1, spec2, tol, as_json, out_path):
    """Decide whether two dilations generate the same finitely correlated state."""
    res = pgfcs_equal(_spec_from_file(spec1), _spec_from_file(spec2), tol=tol)
    report = {
        "equal": res.equal,
        "U": serialize.matrix_to_json(res.U) if res.equal else None,
        "phi": res.phi if res.equal else None,
        "spectral_radius": res.spectral_radius,
        "residuals": {
            "intertwine": res.intertwine,
            "rho_commute": res.rho_commute,
            "moment_gap": res.moment_gap,
        },
        "reason": res.reason,
    }
    emit(report, as_json, out_path)


def run(argv=None) -> int:
    """Invoke the CLI and map package errors to exit codes."""
    try:
        main.main(args=argv, standalone_mode=False)
    except QdbError as exc:
        click.echo(f"error={type(exc).__name__} message={exc}", err=True)
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    return 0


def entry() -> None:
    sys.exit(run())


if __name__ == "__main__":
    entry()
