"""Differential campaigns: a program against its translation, at every time point."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from ..errors import ValidationError
from ..fragments import LARS_FRAGMENTS, LDSR_FRAGMENTS
from ..transpile import RHO, STRICT
from .generate import DESK, Bounds, gen_fragment_instance
from .profiles import LTuple, Profile, as_profile, check_expressibility

# source fragment of each mapping and the profiles it is claimed to preserve
SOURCE_FRAGMENT = {1: "F1", 2: "F2", 3: "F3", 4: "F4", 5: "F5", 6: "F6", 7: "F7"}
GRANTED = {
    1: {Profile.ATOMIC},
    2: {Profile.ATOMIC, Profile.BOUND},
    3: {Profile.ATOMIC, Profile.BOUND, Profile.FULL},
    4: {Profile.ATOMIC, Profile.BOUND},
    5: {Profile.ATOMIC, Profile.BOUND, Profile.FULL},
    6: {Profile.ATOMIC, Profile.BOUND, Profile.FULL},
    7: {Profile.ATOMIC, Profile.BOUND},
}
_SUBSETS = {
    "F1": {"F1", "F2", "F3"},
    "F2": {"F2", "F3"},
    "F3": {"F3"},
    "F4": {"F4", "F5", "F6", "F7"},
    "F5": {"F5", "F6"},
    "F6": {"F6"},
    "F7": {"F7"},
}


@dataclass(frozen=True)
class CampaignConfig:
    fragment: str
    rho: int
    profile: Profile
    strict: bool

    def to_obj(self) -> dict:
        return {"fragment": self.fragment, "rho": self.rho, "profile": self.profile.value, "strict": self.strict}


def validate_config(fragment: str, rho: int, phi, strict: bool) -> CampaignConfig:
    """Reject combinations the expressibility tables do not claim."""
    if fragment not in LARS_FRAGMENTS + LDSR_FRAGMENTS:
        raise ValidationError(f"unknown fragment {fragment!r}")
    if rho not in RHO:
        raise ValidationError(f"unknown mapping rho{rho}")
    phi = as_profile(phi)
    source = SOURCE_FRAGMENT[rho]
    if fragment not in _SUBSETS[source]:
        raise ValidationError(f"rho{rho} is defined on {source}, which does not contain {fragment}")
    if phi not in GRANTED[rho]:
        raise ValidationError(f"rho{rho} is not claimed to preserve the {phi.value} profile on {fragment}")
    if strict and rho not in STRICT:
        raise ValidationError(f"rho{rho} introduces auxiliary predicates; use the filtered comparison")
    return CampaignConfig(fragment, rho, phi, strict)


@dataclass(frozen=True)
class TrialResult:
    seed: int
    n: int
    failures: tuple  # (t, Verdict)
    error: str | None = None

    @property
    def passed(self) -> bool:
        return not self.failures and self.error is None


@dataclass
class CampaignReport:
    config: CampaignConfig
    trials: list = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.trials)

    @property
    def ok(self) -> bool:
        return self.passed == len(self.trials)

    def failures(self) -> list[dict]:
        out = []
        for r in self.trials:
            if r.error is not None:
                out.append({"seed": r.seed, "t": None, "error": r.error})
            for t, v in r.failures:
                out.append({"seed": r.seed, "t": t, "diff": v.to_obj()["first_diff"]})
        return out

    def records(self) -> list[dict]:
        cfg = self.config.to_obj()
        out = []
        for r in self.trials:
            verdict = "pass" if r.passed else "fail"
            diff = [{"t": t, **v.to_obj()} for t, v in r.failures]
            out.append({**cfg, "seed": r.seed, "t_range": [0, r.n], "verdict": verdict, "diff": diff, "error": r.error})
        return out

    def summary(self) -> str:
        c = self.config
        mode = "strict" if c.strict else "filtered"
        return f"{c.fragment} rho{c.rho} {c.profile.value} {mode}: {self.passed}/{len(self.trials)} passed"


def run_trial(config: CampaignConfig, seed: int, bounds: Bounds = DESK, times=None) -> TrialResult:
    inst = gen_fragment_instance(config.fragment, seed, bounds)
    source = LTuple(inst.program, inst.stream, inst.background)
    try:
        target = source.with_program(RHO[config.rho](inst.program).program)
    except Exception as exc:  # a crash is a failed trial, not a crashed campaign
        return TrialResult(seed, inst.stream.n, (), f"{type(exc).__name__}: {exc}")
    failures = []
    for t in range(inst.stream.n + 1) if times is None else times:
        try:
            v = check_expressibility(source, target, t, config.profile, config.strict)
        except Exception as exc:
            return TrialResult(seed, inst.stream.n, tuple(failures), f"t={t}: {type(exc).__name__}: {exc}")
        if not v.equal:
            failures.append((t, v))
    return TrialResult(seed, inst.stream.n, tuple(failures))


def replay(fragment: str, rho: int, phi, strict: bool, seed: int, t: int, bounds: Bounds = DESK) -> TrialResult:
    """Re-run one reported failure from its seed and time point."""
    return run_trial(validate_config(fragment, rho, phi, strict), seed, bounds, [t])


def _trial_job(args) -> TrialResult:
    return run_trial(*args)


def differential_campaign(
    fragment: str,
    rho: int,
    phi,
    strict: bool,
    trials: int,
    bounds: Bounds = DESK,
    *,
    seed: int = 0,
    workers: int = 1,
) -> CampaignReport:
    config = validate_config(fragment, rho, phi, strict)
    jobs = [(config, seed + i, bounds) for i in range(trials)]
    report = CampaignReport(config)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            report.trials = list(pool.map(_trial_job, jobs))
    else:
        report.trials = [_trial_job(j) for j in jobs]
    return report


TABLE_ROWS = (
    ("F1", 1, Profile.ATOMIC, True),
    ("F2", 2, Profile.BOUND, True),
    ("F3", 3, Profile.FULL, True),
    ("F4", 4, Profile.BOUND, False),
    ("F5", 5, Profile.FULL, False),
    ("F6", 6, Profile.FULL, True),
    ("F7", 7, Profile.BOUND, True),
)
