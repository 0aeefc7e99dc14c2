"""
    Scenario.py

    Scenario documents and the runners behind each command. A runner
    returns named checks plus a JSON report; the scenario passes when every
    check does, and fails naming the first invariant that did not hold.
"""
from __future__ import annotations

import itertools
import logging
import random
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from . import Config
from . import Exception as ex
from .Filters import (COUNTABLE_INTERSECTIONS, FINITE_INTERSECTIONS, ExplicitFilter, HeadKernelFamily, audit_filter,
                      audit_oracle, filter_contains, generate_normal_filter, minimality_oracle, omega1_completion)
from .Forcing import check_name, symmetry_sweep, von_neumann
from .Groups import ExplicitGroup, ExplicitSubgroup, SupportKernel, SymbolicGroup, named_group, small_groups
from .HS import hs_closure_suite, is_hs, tuple_sym_check
from .Iteration import IterationState, direct_limit_identify
from .Ordinal import (COF_GE_OMEGA1, COF_OMEGA, DEFAULT_ATOMS, AtomTable, Bounded, CofinalFailure,
                      CountableSetDescriptor, Ord, Tail, parse_ord, stage_bound)
from .PairsApp import (build_fs_model, build_pairs_model, countable_mode_counterpart, enumeration_contrast,
                       fs_dc_counterexample, refute_choice_function, stage_symmetry, truncated_family,
                       verify_certificate, verify_group_lemma)

log = logging.getLogger(__name__)

COMMANDS = ("audit-filter", "symmetry-lemma", "limit-filter", "hs-check", "pairs-demo", "fs-contrast",
            "minimality-oracle")


class Budgets(BaseModel):
    depth: Optional[int] = Field(default=None, ge=0, le=3)
    prefix: Optional[int] = Field(default=None, ge=0, le=4)
    corpus_max_conditions: Optional[int] = Field(default=None, ge=1, le=6)
    max_rank: Optional[int] = Field(default=None, ge=0)
    samples: Optional[int] = Field(default=None, ge=0)

    model_config = ConfigDict(extra="forbid")


class Scenario(BaseModel):
    id: str = Field(pattern=r"^[A-Za-z0-9_.-]+$")
    command: Literal["audit-filter", "symmetry-lemma", "limit-filter", "hs-check", "pairs-demo", "fs-contrast",
                     "minimality-oracle"]
    inputs: Dict[str, Any] = Field(default_factory=dict)
    budgets: Budgets = Field(default_factory=Budgets)

    model_config = ConfigDict(extra="forbid")


def load_scenarios(document: Union[Dict[str, Any], List[Dict[str, Any]]]) -> List[Scenario]:
    """One scenario object or a list of them."""
    items = document if isinstance(document, list) else [document]
    out = [Scenario.model_validate(item) for item in items]
    ids = [s.id for s in out]
    if len(set(ids)) != len(ids):
        raise ex.SFWInputException(f"duplicate scenario ids in {ids}")
    return out


@dataclass
class CheckLine:
    invariant: str
    passed: bool
    detail: str = ""

    def to_json(self):
        return {"invariant": self.invariant, "passed": self.passed, "detail": self.detail}


@dataclass
class Outcome:
    checks: List[CheckLine] = field(default_factory=list)
    report: Dict[str, Any] = field(default_factory=dict)
    certificates: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    why: List[str] = field(default_factory=list)

    def check(self, invariant: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(CheckLine(invariant, bool(passed), detail))
        return bool(passed)


@dataclass
class ScenarioResult:
    id: str
    command: str
    passed: bool
    failing_invariant: Optional[str]
    code: int
    outcome: Outcome
    error: Optional[str] = None

    def to_json(self):
        return {"id": self.id, "command": self.command, "passed": self.passed,
                "failing_invariant": self.failing_invariant, "exit_code": self.code, "error": self.error,
                "checks": [c.to_json() for c in self.outcome.checks], "report": self.outcome.report,
                "certificates": sorted(self.outcome.certificates)}

    def text(self, why: bool = False) -> List[str]:
        status = "PASS" if self.passed else "FAIL"
        lines = [f"{self.id} ({self.command}): {status}"]
        if self.error:
            lines.append(f"  error: {self.error}")
        for c in self.outcome.checks:
            mark = "ok" if c.passed else "FAILED"
            lines.append(f"  [{mark}] {c.invariant}" + (f": {c.detail}" if c.detail else ""))
        if self.failing_invariant:
            lines.append(f"  failing invariant: {self.failing_invariant}")
        if why and self.outcome.why:
            lines.append("  why:")
            lines.extend(f"    {w}" for w in self.outcome.why)
        return lines


_commands: Dict[str, Callable[[Scenario, Dict[str, Any]], Outcome]] = {}


def command(name: str):
    def wrap(fn):
        _commands[name] = fn
        return fn
    return wrap


def _budget(s: Scenario, overrides: Dict[str, Any], key: str, default):
    """CLI overrides beat scenario budgets, which beat config.ini."""
    if overrides.get(key) is not None:
        return overrides[key]
    value = getattr(s.budgets, key)
    return default if value is None else value


def run_scenario(s: Scenario, overrides: Optional[Dict[str, Any]] = None) -> ScenarioResult:
    overrides = overrides or {}
    log.info("running %s (%s)", s.id, s.command)
    try:
        outcome = _commands[s.command](s, overrides)
    except ex.SFWCheckException as exc:
        outcome = Outcome()
        outcome.check(exc.invariant or type(exc).__name__, False, exc.message)
        return ScenarioResult(s.id, s.command, False, exc.invariant or type(exc).__name__, exc.code, outcome,
                              exc.message)
    except ex.SFWException as exc:
        log.info("%s: %s", s.id, exc.message)
        return ScenarioResult(s.id, s.command, False, None, exc.code, Outcome(), f"{type(exc).__name__}: {exc.message}")
    failing = next((c.invariant for c in outcome.checks if not c.passed), None)
    result = ScenarioResult(s.id, s.command, failing is None, failing, 0 if failing is None else 1, outcome)
    log.info("%s: %s", s.id, "pass" if result.passed else f"fail ({failing})")
    return result


# input decoding

def _table(inputs: Dict[str, Any]) -> AtomTable:
    atoms = inputs.get("atoms")
    return AtomTable.from_json(atoms) if atoms else DEFAULT_ATOMS


def _group(spec: Dict[str, Any]) -> ExplicitGroup:
    return named_group(spec["kind"], spec.get("n", 0))


def _subgroup(G: ExplicitGroup, spec) -> ExplicitSubgroup:
    """"full", "trivial", {"lattice": k} or {"generated_by": [i, ...]}."""
    if spec == "full":
        return G.full()
    if spec == "trivial":
        return G.trivial_subgroup()
    if isinstance(spec, dict) and "lattice" in spec:
        lattice = G.subgroup_lattice()
        k = spec["lattice"]
        if not 0 <= k < len(lattice):
            raise ex.SFWInputException(f"{G} has {len(lattice)} subgroups, no index {k}")
        return lattice[k]
    if isinstance(spec, dict) and "generated_by" in spec:
        return G.generated_subgroup(spec["generated_by"])
    raise ex.SFWInputException(f"cannot read a subgroup from {spec!r}")


def _descriptor(spec: Optional[Dict[str, Any]], table: AtomTable) -> CountableSetDescriptor:
    if not spec:
        return CountableSetDescriptor.empty()
    return CountableSetDescriptor.from_json({"points": spec.get("points", []), "tails": spec.get("tails", [])}, table)


def sample_countable_ord(rng: random.Random, table: AtomTable = DEFAULT_ATOMS) -> Ord:
    """A random ordinal below w^3."""
    w = Ord.omega(table)
    out = Ord.finite(rng.randrange(6), table)
    if rng.random() < 0.6:
        out = w.mul_natural(rng.randrange(1, 4)) + out
    if rng.random() < 0.3:
        out = Ord.omega_power(Ord.finite(2, table)).mul_natural(rng.randrange(1, 3)) + out
    return out


def sample_descriptor(rng: random.Random, table: AtomTable = DEFAULT_ATOMS) -> CountableSetDescriptor:
    """A random countable set below w^3: a few points and at most one w-block."""
    points = [sample_countable_ord(rng, table) for _ in range(rng.randrange(4))]
    tails = []
    if rng.random() < 0.5:
        k = rng.randrange(1, 4)
        tails.append(Tail.naturals_copy(Ord.omega(table).mul_natural(k)))
    return CountableSetDescriptor.of(points, tails, table)


# runners

@command("audit-filter")
def run_audit_filter(s: Scenario, overrides: Dict[str, Any]) -> Outcome:
    inputs = s.inputs
    out = Outcome()
    if inputs.get("sweep"):
        agreed = total = 0
        for G in small_groups():
            lattice = G.subgroup_lattice()
            for k in (1, 2):
                for family in itertools.combinations(lattice, k):
                    total += 1
                    agreed += audit_oracle(G, list(family)).agrees
        out.report["sweep"] = {"families": total, "agreeing": agreed}
        out.check("audit agrees with lattice enumeration", agreed == total, f"{agreed}/{total}")
        return out
    if "symbolic" in inputs:
        spec = inputs["symbolic"]
        table = _table(inputs)
        lam = parse_ord(spec["lambda"], table)
        G = SymbolicGroup(lam, named_group("cyclic", 2))
        F = generate_normal_filter(G, [HeadKernelFamily(lam)], spec.get("mode", FINITE_INTERSECTIONS))
        report = audit_filter(F)
        out.report["audit"] = report.to_json()
        out.report["filter"] = F.to_json()
    else:
        G = _group(inputs["group"])
        family = [_subgroup(G, k) for k in inputs.get("family", ["full"])]
        F = ExplicitFilter(G, family, generated=inputs.get("generated", False))
        report = audit_filter(F)
        out.report["audit"] = report.to_json()
        out.report["filter"] = F.to_json()
        if G.order <= Config.ORACLE_MAX_ORDER:
            oracle = audit_oracle(G, family) if not F.generated else minimality_oracle(G, family)
            out.report["oracle"] = oracle.to_json()
            out.check("audit agrees with lattice enumeration", oracle.agrees)
    out.check("filter axioms", report.is_filter, report.filter_violation or "")
    out.check("normality", report.is_normal, str(report.normal_witness or ""))
    out.check("omega1-completeness", report.is_omega1_complete, str(report.omega1_witness or ""))
    return out


@command("minimality-oracle")
def run_minimality_oracle(s: Scenario, overrides: Dict[str, Any]) -> Outcome:
    inputs = s.inputs
    out = Outcome()
    groups = [_group(g) for g in inputs["groups"]] if "groups" in inputs else small_groups()
    max_generators = inputs.get("max_generators", 2)
    rows = []
    for G in groups:
        lattice = G.subgroup_lattice()
        agreed = total = completion_fixed = 0
        for k in range(0, max_generators + 1):
            for gens in itertools.combinations(lattice, k):
                total += 1
                agreed += minimality_oracle(G, list(gens)).agrees
                F = generate_normal_filter(G, list(gens))
                completion_fixed += omega1_completion(F).members() == F.members()
        rows.append({"group": str(G), "families": total, "agreeing": agreed, "completion_fixed": completion_fixed})
        out.check(f"minimality on {G}", agreed == total, f"{agreed}/{total}")
        out.check(f"omega1-completion is the identity on {G}", completion_fixed == total)
    out.report["groups"] = rows
    return out


@command("symmetry-lemma")
def run_symmetry_lemma(s: Scenario, overrides: Dict[str, Any]) -> Outcome:
    inputs = s.inputs
    out = Outcome()
    report = symmetry_sweep(
        max_conditions=_budget(s, overrides, "corpus_max_conditions", 4),
        max_rank=_budget(s, overrides, "max_rank", 2),
        n_conditions=inputs.get("n_conditions", 2),
        formula_depth=inputs.get("formula_depth", 2),
        env_size=inputs.get("env_size", 2),
        env_cap=inputs.get("env_cap", 24),
        formula_cap=inputs.get("formula_cap", 120),
        rng=random.Random(Config.seed()),
    )
    out.report["symmetry"] = report.to_json()
    out.check("symmetry lemma", report.ok, f"{report.cases} cases, {len(report.violations)} violations")
    return out


@command("limit-filter")
def run_limit_filter(s: Scenario, overrides: Dict[str, Any]) -> Outcome:
    inputs = s.inputs
    out = Outcome()
    table = _table(inputs)
    lam = parse_ord(inputs.get("lambda", "w"), table)
    G = SymbolicGroup(lam, named_group("cyclic", 2))
    finite = generate_normal_filter(G, [HeadKernelFamily(lam)], FINITE_INTERSECTIONS)
    countable = generate_normal_filter(G, [HeadKernelFamily(lam)], COUNTABLE_INTERSECTIONS)
    out.report["filters"] = {"finite": finite.to_json(), "countable": countable.to_json()}
    cof = lam.cofinality_class()
    if cof == COF_OMEGA:
        tail = Tail.sequence(lam)
        K = SupportKernel(G, CountableSetDescriptor.of((), (tail,), table))
        in_countable, in_finite = filter_contains(countable, K), filter_contains(finite, K)
        out.report["dichotomy"] = {"kernel": str(K), "countable": in_countable, "finite": in_finite}
        out.check("limit-filter dichotomy: countable mode contains the w-union kernel", in_countable)
        out.check("limit-filter dichotomy: finite mode misses the w-union kernel", not in_finite)
        bound = stage_bound(K.support, lam)
        out.check("stage bounding fails at cofinality w", isinstance(bound, CofinalFailure), str(bound))
        out.check("countable-mode filter is omega1-complete", audit_filter(countable).is_omega1_complete)
        out.check("finite-mode filter is not omega1-complete", not audit_filter(finite).is_omega1_complete)
    elif cof == COF_GE_OMEGA1:
        rng = random.Random(Config.seed())
        n = _budget(s, overrides, "samples", 100)
        agree = bounded = 0
        supports = []
        for _ in range(n):
            E = sample_descriptor(rng, table)
            if E.is_empty() or not E.supremum() < lam:
                agree += 1
                bounded += 1
                continue
            K = SupportKernel(G, E)
            agree += filter_contains(finite, K) == filter_contains(countable, K)
            bounded += isinstance(stage_bound(E, lam), Bounded)
            supports.append(E)
        out.report["sampled"] = {"samples": n, "agreeing": agree, "bounded": bounded}
        out.check("finite and countable modes agree below cofinality >= w1", agree == n, f"{agree}/{n}")
        out.check("stage bounding below cofinality >= w1", bounded == n, f"{bounded}/{n}")
        out.check("finite-mode filter is omega1-complete", audit_filter(finite).is_omega1_complete)
        identified = direct_limit_identify(IterationState(lam), lam, supports[:5])
        out.report["identification"] = identified.to_json()
    else:
        raise ex.NotALimit(f"{lam} is not a limit")
    return out


_NAME_TOKEN = re.compile(r"^(a|b|pair|check)(\d+)$")


def _name(token: str, state):
    if token == "family":
        return state.family_name()
    m = _NAME_TOKEN.match(token)
    if m is None:
        raise ex.SFWInputException(f"unknown name token {token!r}")
    kind, k = m.group(1), int(m.group(2))
    if kind == "check":
        return check_name(von_neumann(k), state.truncation.top)
    return {"a": state.a_name, "b": state.b_name, "pair": state.pair_name}[kind](k)


@command("hs-check")
def run_hs_check(s: Scenario, overrides: Dict[str, Any]) -> Outcome:
    inputs = s.inputs
    out = Outcome()
    table = _table(inputs)
    state = build_pairs_model(parse_ord(inputs.get("kappa", "w1"), table),
                              _budget(s, overrides, "depth", Config.PAIRS_DEPTH),
                              _budget(s, overrides, "prefix", Config.PAIRS_PREFIX))
    system = state.system() if inputs.get("system") == "limit" else state.prefix_system()
    expect = inputs.get("expect", {})
    verdicts = {}
    memo = {}
    for token in inputs.get("names", ["check0", "pair0", "family"]):
        r = is_hs(_name(token, state), system, memo)
        verdicts[token] = {"verdict": r.verdict, "stabilizer": str(r.stabilizer)}
        wanted = expect.get(token, True)
        out.check(f"hereditary symmetry of {token}", r.verdict == wanted,
                  f"verdict {r.verdict}, expected {wanted}")
        if not r.verdict:
            out.why.extend([f"{token}:"] + [f"  {line}" for line in r.why_text()])
    out.report["verdicts"] = verdicts
    for tokens in inputs.get("tuples", []):
        K, same = tuple_sym_check([_name(t, state) for t in tokens], system)
        out.report.setdefault("tuples", []).append({"names": tokens, "stabilizer": str(K), "identity": same})
        out.check(f"tuple stabilizer identity for {','.join(tokens)}", same)
    if inputs.get("closure"):
        corpus = [_name(t, state) for t in inputs.get("corpus", ["check0", "pair0"])]
        params = [_name(t, state) for t in inputs.get("params", [])]
        closure = hs_closure_suite(system, corpus, params)
        out.report["closure"] = closure.to_json()
        out.check("closure of HS names under the constructors", closure.ok, f"{len(closure.failures)} failures")
    return out


def _tamper(cert: Dict[str, Any]) -> Optional[Dict[str, Any]]:
    """Move alpha below a positive witness stage; None when every witness stage is 0."""
    if not any(w["beta"] != "0" for w in cert["witness"]):
        return None
    bad = dict(cert)
    bad["chosen_alpha"] = "0"
    return bad


@command("pairs-demo")
def run_pairs_demo(s: Scenario, overrides: Dict[str, Any]) -> Outcome:
    inputs = s.inputs
    out = Outcome()
    table = _table(inputs)
    depth = _budget(s, overrides, "depth", Config.PAIRS_DEPTH)
    state = build_pairs_model(parse_ord(inputs.get("kappa", "w1"), table), depth,
                              _budget(s, overrides, "prefix", Config.PAIRS_PREFIX))
    out.report["state"] = state.summary()
    lemma = verify_group_lemma(state)
    out.report["group_lemma"] = lemma.to_json()
    out.check("iteration group is abelian", lemma.abelian_prefix and lemma.abelian_symbolic)
    out.check("g_alpha is supported at alpha", all(lemma.swap_supports.values()))
    out.check("g_alpha lies in ker rho_beta for beta <= alpha", all(lemma.kernel_checks.values()))
    sym = stage_symmetry(depth)
    out.report["stage_symmetry"] = sym
    out.check("sym(a) and sym(b) are trivial", sym["a_trivial"] and sym["b_trivial"])
    out.check("sym(pair) is the full step group", sym["pair_full"])
    family = is_hs(state.family_name(), state.prefix_system())
    out.report["family"] = {"stabilizer": str(family.stabilizer), "verdict": family.verdict}
    out.check("sym(family prefix) is the full group", family.stabilizer.is_full())
    witness = [(parse_ord(w["beta"], table),
                None if w.get("H") is None else
                SupportKernel(state.group.restrict_group(parse_ord(w["beta"], table)), _descriptor(w["H"], table)))
               for w in inputs.get("witness", [])]
    kappa_prime = inputs.get("kappa_prime")
    if kappa_prime is not None:
        out.report["truncated_family"] = truncated_family(state, parse_ord(kappa_prime, table))
    cert = refute_choice_function(state, witness, None if kappa_prime is None else parse_ord(kappa_prime, table))
    doc = cert.to_json()
    out.certificates[s.id] = doc
    verdict = verify_certificate(doc)
    out.report["verification"] = verdict.to_json()
    out.check("certificate replays", verdict.accepted, "; ".join(verdict.failures))
    bad = _tamper(doc)
    if bad is not None:
        rejected = not verify_certificate(bad).accepted
        out.report["tampered_rejected"] = rejected
        out.check("tampered certificate is rejected", rejected)
    return out


@command("fs-contrast")
def run_fs_contrast(s: Scenario, overrides: Dict[str, Any]) -> Outcome:
    inputs = s.inputs
    out = Outcome()
    depth = _budget(s, overrides, "depth", Config.PAIRS_DEPTH)
    prefix = _budget(s, overrides, "prefix", Config.PAIRS_PREFIX)
    finite = build_fs_model(depth, prefix, FINITE_INTERSECTIONS)
    cert = fs_dc_counterexample(finite, inputs.get("witness_stages", [0, 1]), inputs.get("samples", 3))
    doc = cert.to_json()
    out.certificates[s.id] = doc
    verdict = verify_certificate(doc)
    out.report["verification"] = verdict.to_json()
    out.check("finite-support certificate replays", verdict.accepted, "; ".join(verdict.failures))
    countable = build_fs_model(depth, prefix, COUNTABLE_INTERSECTIONS)
    try:
        fs_dc_counterexample(countable, inputs.get("witness_stages", [0, 1]))
        out.check("countable mode refuses the finite-support argument", False)
    except ex.WrongMode as exc:
        counterpart = exc.counterpart
        out.report["countable_counterpart"] = counterpart
        out.check("countable mode refuses the finite-support argument", True)
        out.check("w-tuple stabilizer is a countable-mode member", counterpart["member"])
    contrast = enumeration_contrast(finite)
    out.report["enumeration"] = contrast
    out.check("enumeration of the reals is not finite-mode symmetric", not contrast[FINITE_INTERSECTIONS]["member"])
    out.check("enumeration of the reals is countable-mode symmetric", contrast[COUNTABLE_INTERSECTIONS]["member"])
    out.report["counterpart"] = countable_mode_counterpart(finite)
    return out
