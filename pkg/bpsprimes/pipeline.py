"""
pipeline.py – Job execution for the batch driver.

Flow
----
1. Every job (``count``, ``expsum``, ``dioph``, ``verify``) is turned into
   calls on the computing modules.
2. Jobs run in a bounded process pool; results come back in job order.
3. Each job yields table rows plus an ``ok`` flag; identity suites clear
   the flag when an identity fails.

:func:`map_ordered` is also the reduction primitive of the counting module.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from bpsprimes.config import ExperimentConfig, Job
from bpsprimes.errors import PreconditionError, SpecParseError

logger = logging.getLogger(__name__)


def map_ordered(fn: Callable, arg_tuples: Sequence[tuple], threads: int = 1) -> list:
    """``[fn(*args) for args in arg_tuples]``, optionally in a process pool.

    Results keep the input order, so any reduction over them is identical
    for every worker count.
    """
    arg_tuples = list(arg_tuples)
    if threads <= 1 or len(arg_tuples) <= 1:
        return [fn(*args) for args in arg_tuples]
    with ProcessPoolExecutor(max_workers=min(threads, len(arg_tuples))) as pool:
        return list(pool.map(fn, *zip(*arg_tuples)))


@dataclass
class JobResult:
    """Rows produced by one job."""

    index: int
    kind: str
    rows: list = field(default_factory=list)
    ok: bool = True
    messages: list = field(default_factory=list)


class ExperimentPipeline:
    """Run :class:`~bpsprimes.config.ExperimentConfig` jobs.

    Parameters
    ----------
    threads:
        Worker processes.  With more than one job the pool works at job
        level and each job runs single-threaded; a single job gets the
        workers for its own range partitioning instead.
    seed:
        Seed for sampling grids in the verify suites.
    timing:
        Keep the ``ms`` column of count rows (zeroed when false).
    """

    def __init__(self, threads: int = 1, seed: int = 0, timing: bool = True) -> None:
        self.threads = max(1, threads)
        self.seed = seed
        self.timing = timing

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> "ExperimentPipeline":
        return cls(threads=config.threads, seed=config.seed, timing=config.timing)

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def run(self, jobs: Sequence[Job]) -> list[JobResult]:
        jobs = list(jobs)
        if len(jobs) == 1:
            return [run_job(0, jobs[0], self.seed, self.timing, self.threads)]
        args = [(i, job, self.seed, self.timing, 1) for i, job in enumerate(jobs)]
        results = map_ordered(run_job, args, self.threads)
        for res in results:
            logger.info("job %d (%s): %d rows, ok=%s", res.index, res.kind, len(res.rows), res.ok)
        return results


# ---------------------------------------------------------------------------
# Job runners
# ---------------------------------------------------------------------------

def run_job(index: int, job: Job, seed: int = 0, timing: bool = True, threads: int = 1) -> JobResult:
    runner = _RUNNERS[job.kind]
    logger.info("starting job %d: %s", index, job.to_line())
    result = JobResult(index, job.kind)
    runner(job, result, seed=seed, timing=timing, threads=threads)
    return result


def _split_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise SpecParseError(f"bad number list {text!r}", token=text) from exc


def _split_ints(text: str) -> list[int]:
    from bpsprimes.exactnum import parse_int  # noqa: PLC0415

    return [parse_int(v) for v in text.split(",") if v.strip()]


def build_query(job: Job, x: Optional[int] = None):
    """CountQuery from ``alpha``/``beta``/``c``/``x`` job parameters."""
    from bpsprimes.counting import CountQuery  # noqa: PLC0415
    from bpsprimes.exactnum import parse_exponent, parse_int, parse_surd  # noqa: PLC0415
    from bpsprimes.sequences import BeattySpec, PSSpec  # noqa: PLC0415

    alphas = job.get_list("alpha")
    betas = job.get_list("beta")
    if len(betas) > len(alphas):
        raise SpecParseError("more --beta than --alpha values", token=betas[len(alphas)])
    betas += ["0"] * (len(alphas) - len(betas))
    specs = tuple(BeattySpec(parse_surd(a), parse_surd(b)) for a, b in zip(alphas, betas))
    c = job.get("c")
    ps = PSSpec(parse_exponent(c), strict=job.get("strict", "false") == "true") if c else None
    if x is None:
        x = parse_int(job.get("x", "100"))
    return CountQuery(specs, ps, x)


def _run_count(job: Job, result: JobResult, seed: int, timing: bool, threads: int) -> None:
    from bpsprimes.counting import count_series  # noqa: PLC0415

    xs = [v for raw in job.get_list("x") for v in _split_ints(raw)] or [100]
    query = build_query(job, x=max(xs))
    reports = count_series(query, xs, job.get("method", "auto"), threads)
    for report in reports:
        result.rows.append(report.to_row(timing))
        if report.independence:
            result.messages.append(report.independence)


def _phase(job: Job, default: str):
    from bpsprimes.expsum import parse_phase  # noqa: PLC0415

    return parse_phase(job.get("phase", default))


def _run_expsum(job: Job, result: JobResult, seed: int, timing: bool, threads: int) -> None:
    from bpsprimes import expsum  # noqa: PLC0415
    from bpsprimes.exactnum import parse_int, parse_surd  # noqa: PLC0415

    mode = job.get("mode", "lambda")
    if mode == "lambda":
        phase = _phase(job, "h=0")
        x = parse_int(job.get("x", "10000"))
        value = expsum.lambda_expsum(phase, parse_int(job.get("lo", "0")), x)
        row = {"lemma": "lambda-sum", "params": f"phase={phase};x={x}",
               "direct_value": f"{abs(value):.12g}", "re": f"{value.real:.12g}", "im": f"{value.imag:.12g}"}
        if phase.h:
            env = expsum.lambda_sum_envelope(phase.h, x, float(phase.gamma))
            row.update(envelope=f"{env:.12g}", ratio=f"{abs(value) / env:.6g}")
        result.rows.append(row)
    elif mode == "max":
        result.rows.append(expsum.lambda_expsum_max(_phase(job, "h=1,gamma=12/13"), parse_int(job.get("x", "10000"))).to_row())
    elif mode == "vdc":
        if job.get("coef") is not None:
            from fractions import Fraction  # noqa: PLC0415

            family = expsum.MonomialPhase(float(job.get("coef")), Fraction(job.get("exponent", "2")))
        else:
            family = _phase(job, "h=1,gamma=12/13")
        orders = _split_ints(job.get("order", "2,3"))
        bound = float(job.get("C", expsum.DEFAULT_C_BOUND))
        for a in _split_ints(job.get("a", "10000")):
            for order in orders:
                report = expsum.vdc_bound_check(family, a, order, bound)
                result.rows.append(report.to_row())
                result.ok &= bool(report.ok)
    elif mode == "type":
        report = expsum.type_sum_eval(
            job.get("kind", "I"),
            parse_int(job.get("K", "100")),
            parse_int(job.get("L", "10000")),
            _phase(job, "h=1,gamma=12/13"),
            job.get("a_coeffs"),
            job.get("b_coeffs"),
            parse_int(job.get("x")) if job.get("x") else None,
        )
        result.rows.append(report.to_row())
    elif mode == "davenport":
        alpha = parse_surd(job.get("alpha", "sqrt(2)"))
        result.rows.append(expsum.davenport_bound_check(alpha, parse_int(job.get("N", "10000"))).to_row())
    elif mode == "finite-type":
        alpha = parse_surd(job.get("alpha", "sqrt(2)"))
        report = expsum.finite_type_bound_check(
            alpha, parse_int(job.get("h", "1")), parse_int(job.get("M", "10000")), float(job.get("tau", "1"))
        )
        result.rows.append(report.to_row())
    elif mode == "q-select":
        h = parse_int(job.get("h", "1"))
        K, L = float(parse_int(job.get("K", "1000"))), float(parse_int(job.get("L", "1000")))
        gamma = float(job.get("gamma", str(12 / 13)))
        terms = expsum.weyl_split_terms(h, K, L, gamma)
        Q = expsum.optimal_q_select(terms, 1.0, L)
        result.rows.append({
            "lemma": "q-select",
            "params": f"h={h};K={K:g};L={L:g};gamma={gamma:g}",
            "Q": f"{Q:.12g}",
            "envelope": f"{expsum.envelope_value(terms, Q):.12g}",
            "analytic_bound": f"{expsum.srinivasan_bound(terms, 1.0, L):.12g}",
        })
    else:
        raise SpecParseError(f"unknown expsum mode {mode!r}", token=mode)


def _run_dioph(job: Job, result: JobResult, seed: int, timing: bool, threads: int) -> None:
    from bpsprimes import diophantine  # noqa: PLC0415
    from bpsprimes.exactnum import parse_int, parse_surd  # noqa: PLC0415

    mode = job.get("mode", "cf")
    if mode in ("cf", "approx", "type"):
        alpha = parse_surd(job.get("alpha", "sqrt(2)"))
    if mode == "cf":
        cf = diophantine.cf_expand(alpha, parse_int(job.get("terms", "10")))
        tail = cf.periodic_tail
        result.rows.append({"alpha": str(alpha), "cf": str(cf), "period": f"{tail[0]},{tail[1]}" if tail else ""})
    elif mode == "approx":
        qmax = parse_int(job.get("Qmax", "10"))
        a, q, theta = diophantine.best_approx(alpha, qmax)
        result.rows.append({"alpha": str(alpha), "Qmax": qmax, "a": a, "q": q, "theta": str(theta)})
    elif mode == "type":
        est = diophantine.estimate_type(alpha, parse_int(job.get("N", "1e6")), _split_floats(job.get("t", "1.0")))
        result.rows.extend(est.to_rows())
        result.messages.extend(est.notes)
    elif mode == "indep":
        omegas = [parse_surd(w) for w in job.get_list("omega")]
        report = diophantine.independence_probe(omegas, parse_int(job.get("B", "50")))
        result.rows.append({
            "omegas": ";".join(report.omegas),
            "B": report.B,
            "relation": " ".join(str(c) for c in report.relation) if report.relation else "",
            "summary": report.summary(),
        })
        result.messages.append(report.summary())
    elif mode == "combined":
        omegas = [parse_surd(w) for w in job.get_list("omega")]
        h_vec = _split_ints(job.get("h", ",".join("1" * len(omegas))))
        est = diophantine.combined_type_check(omegas, h_vec, parse_int(job.get("N", "1e5")), _split_floats(job.get("t", "1.0")))
        for row in est.to_rows():
            row["analytic_tau_bound"] = est.analytic_tau_bound
            row["truncated"] = est.truncated
            result.rows.append(row)
        result.messages.extend(est.notes)
    else:
        raise SpecParseError(f"unknown dioph mode {mode!r}", token=mode)


# ---------------------------------------------------------------------------
# Identity suites
# ---------------------------------------------------------------------------

SUITES = ("psi", "heath-brown", "vaaler", "decomposition", "two-path")
PSI_TOL = 1e-9
HB_TOL = 1e-9
PSI_SAMPLES = 100_000
HB_SWEEP = (10.0, 3)
HB_SAMPLED = (30.0, 3)
HB_SAMPLES = 100
AUDIT_XS = "1e4,1e5,1e6"


def _suite_row(result: JobResult, suite: str, case: str, value: float, tol: float, ok: bool) -> None:
    result.rows.append({"suite": suite, "case": case, "value": f"{value:.6g}", "tolerance": f"{tol:g}", "ok": ok})
    result.ok &= ok
    if not ok:
        result.messages.append(f"{suite}: {case} failed ({value:.3g} vs {tol:g})")


def _default_canonical(job: Job, betas: Sequence[str]) -> Job:
    if job.get_list("alpha") or job.get("c"):
        return job
    params = dict(job.params)
    params.update(alpha=["sqrt(2)", "sqrt(3)"], beta=list(betas), c="13/12")
    return Job(job.kind, params)


def _suite_psi(job: Job, result: JobResult, seed: int, threads: int) -> None:
    import numpy as np  # noqa: PLC0415

    from bpsprimes.exactnum import parse_int  # noqa: PLC0415
    from bpsprimes.sequences import char_psi_identity_residual  # noqa: PLC0415

    query = build_query(_default_canonical(job, ["3/10", "7/10"]), x=100)
    samples = parse_int(job.get("samples", str(PSI_SAMPLES)))
    mmax = parse_int(job.get("mmax", "1e9"))
    rng = np.random.default_rng(seed)
    ms = rng.integers(1, mmax + 1, size=samples)
    specs = list(query.beatty_specs) + ([query.ps_spec] if query.ps_spec else [])
    for spec in specs:
        worst = max(abs(char_psi_identity_residual(spec, int(m))) for m in ms)
        _suite_row(result, "psi", str(spec), worst, PSI_TOL, worst < PSI_TOL)


def _suite_heath_brown(job: Job, result: JobResult, seed: int, threads: int) -> None:
    """Exhaustive sweep at (z, k) and random n <= 2z^k.

    Without an explicit ``z``/``k`` the sweep runs at HB_SWEEP and the
    random sample at HB_SAMPLED.
    """
    import numpy as np  # noqa: PLC0415

    from bpsprimes.exactnum import parse_int  # noqa: PLC0415
    from bpsprimes.expsum import HBParams, heath_brown_check  # noqa: PLC0415

    explicit = job.get("z") is not None or job.get("k") is not None
    params = HBParams(float(job.get("z", str(HB_SWEEP[0]))), parse_int(job.get("k", str(HB_SWEEP[1]))))
    nmax = parse_int(job.get("nmax", "2000"))
    worst = max(heath_brown_check(n, params) for n in range(1, nmax + 1))
    _suite_row(result, "heath-brown", f"n<={nmax},z={params.z:g},k={params.k}", worst, HB_TOL, worst < HB_TOL)

    samples = parse_int(job.get("samples", str(HB_SAMPLES)))
    if samples:
        sampled = params if explicit else HBParams(*HB_SAMPLED)
        rng = np.random.default_rng(seed)
        top = int(2 * sampled.z ** sampled.k)
        ns = rng.integers(1, top + 1, size=samples)
        worst = max(heath_brown_check(int(n), sampled) for n in ns)
        case = f"{samples} random n<={top},z={sampled.z:g},k={sampled.k}"
        _suite_row(result, "heath-brown", case, worst, HB_TOL, worst < HB_TOL)


def _suite_vaaler(job: Job, result: JobResult, seed: int, threads: int) -> None:
    from bpsprimes.expsum import GRID_TOL, vaaler_build  # noqa: PLC0415

    for H in _split_ints(job.get("H", "4,16,64")):
        approx = vaaler_build(H, validate=False)
        slack = approx.grid_slack()
        bounds_ok = all(abs(approx.a[h]) <= 1 / (2 * abs(h)) for h in approx.a) and all(
            0 <= b <= 1 / (H + 1) for b in approx.b.values()
        )
        _suite_row(result, "vaaler", f"H={H}", slack, -GRID_TOL, slack >= -GRID_TOL and bounds_ok)


def _suite_decomposition(job: Job, result: JobResult, seed: int, threads: int) -> None:
    from bpsprimes.counting import AUDIT_TOL, decomposition_audit  # noqa: PLC0415
    from bpsprimes.exactnum import parse_int  # noqa: PLC0415

    job = _default_canonical(job, ["0", "0"])
    for x in _split_ints(job.get("x", AUDIT_XS)):
        audit = decomposition_audit(build_query(job, x=x))
        err = abs(audit.total - audit.identity_count)
        _suite_row(result, "decomposition", f"x={x}", err, AUDIT_TOL * max(1, audit.identity_count), audit.ok)


def _suite_two_path(job: Job, result: JobResult, seed: int, threads: int) -> None:
    from bpsprimes.counting import count_series  # noqa: PLC0415
    from bpsprimes.errors import IdentityCheckError  # noqa: PLC0415

    job = _default_canonical(job, ["3/10", "7/10"])
    xs = _split_ints(job.get("x", "1e5"))
    query = build_query(job, x=max(xs))
    try:
        reports = count_series(query, xs, "both", threads)
        for r in reports:
            _suite_row(result, "two-path", f"x={r.x}", 0.0, 0.0, True)
    except IdentityCheckError as exc:
        _suite_row(result, "two-path", str(exc), math.inf, 0.0, False)


_SUITE_RUNNERS = {
    "psi": _suite_psi,
    "heath-brown": _suite_heath_brown,
    "vaaler": _suite_vaaler,
    "decomposition": _suite_decomposition,
    "two-path": _suite_two_path,
}


def _run_verify(job: Job, result: JobResult, seed: int, timing: bool, threads: int) -> None:
    suite = job.get("suite", "all")
    if suite != "all" and suite not in _SUITE_RUNNERS:
        raise SpecParseError(f"unknown verify suite {suite!r}", token=suite)
    names = SUITES if suite == "all" else (suite,)
    for name in names:
        try:
            _SUITE_RUNNERS[name](job, result, seed, threads)
        except PreconditionError as exc:
            _suite_row(result, name, str(exc), math.nan, 0.0, False)


_RUNNERS = {
    "count": _run_count,
    "expsum": _run_expsum,
    "dioph": _run_dioph,
    "verify": _run_verify,
}
