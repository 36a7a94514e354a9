"""Deterministic sweeps that regenerate the tables and checks as data.

Every report is a header record, one record per item and a closing summary
record.  The header carries the registry and conditions-file digests so a
finding can be traced to the transcription it came from.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .formula import Formula, fresh_instance, to_text
from .hilbert import builtin_system
from .kripke import DEFAULT_FRAME_BUDGET, conditions_digest, correspondence_scan, load_conditions
from .nmatrix import builtin_matrix, check_consequence, compose, refines
from .sampling import random_sequent
from .strengthenings import Remark, TBAT_AXIOMS, all_strengthenings, registry_digest, strengthening
from .tableau import Confirmed, Refuted, Unchecked, verify_remark

REPORT_NAMES = ("strengthenings", "correspondence", "remarks", "w-vs-simplified", "tbat-variants", "refinement")


@dataclass
class Report:
    name: str
    params: Dict
    records: List[Dict] = field(default_factory=list)
    totals: Dict = field(default_factory=dict)
    table: List[str] = field(default_factory=list)
    findings: int = 0  # items that contradict an expectation

    def header(self) -> Dict:
        return {
            "report": self.name,
            "params": self.params,
            "registry": registry_digest(),
            "conditions": conditions_digest(),
        }

    def to_jsonl(self) -> str:
        rows = [self.header()] + self.records + [{"summary": self.totals, "findings": self.findings}]
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)

    def render(self) -> str:
        h = self.header()
        lines = [f"# {self.name}  registry={h['registry']} conditions={h['conditions']}"]
        if self.params:
            lines.append("# " + " ".join(f"{k}={v}" for k, v in sorted(self.params.items())))
        lines += self.table
        lines.append("summary: " + ", ".join(f"{k}={v}" for k, v in self.totals.items()))
        return "\n".join(lines) + "\n"


def _pad(cols: Sequence[str], widths: Sequence[int]) -> str:
    return "  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()


# ---------------------------------------------------------------------------

def report_strengthenings() -> Report:
    """Each row's axiom: valid once its cell is restricted, invalid in the simplified base."""
    base = builtin_matrix("W_SIMPLIFIED")
    rep = Report("strengthenings", {})
    widths = (14, 12, 9, 9)
    rep.table.append(_pad(("name", "cell", "composed", "base"), widths))
    ok = 0
    for s in all_strengthenings():
        f = s.instance()
        strong = compose(base, [s.restriction], name=s.name)
        in_composed = check_consequence([], f, strong, max_closure=None)
        in_base = check_consequence([], f, base, max_closure=None)
        good = in_composed.valid and not in_base.valid
        ok += good
        rep.records.append({
            "name": s.name,
            "restriction": str(s.restriction),
            "axiom": to_text(f),
            "valid_in_composed": in_composed.valid,
            "invalid_in_base": not in_base.valid,
            "base_witness": in_base.witness.as_dict() if in_base.witness else None,
        })
        rep.table.append(_pad((s.name, str(s.restriction), str(in_composed.valid), str(not in_base.valid)), widths))
    rep.totals = {"rows": len(rep.records), "checks": 2 * len(rep.records), "passed": ok}
    rep.findings = len(rep.records) - ok
    return rep


def report_correspondence(max_n: int = 3, cls: str = "all", jobs: int = 1,
                          budget: int = DEFAULT_FRAME_BUDGET) -> Report:
    rep = Report("correspondence", {"max_n": max_n, "class": cls})
    widths = (16, 11, 8)
    rep.table.append(_pad(("name", "mismatches", "frames"), widths))
    for row in load_conditions():
        r = correspondence_scan(row.axiom, row.condition, max_n=max_n, cls=cls, budget=budget, name=row.name, jobs=jobs)
        rec = r.to_json()
        rec["source"] = row.source
        rep.records.append(rec)
        rep.table.append(_pad((row.name, str(len(r.mismatches)), str(r.frames_scanned)), widths))
        if r.mismatches:
            first = r.mismatches[0]
            rep.table.append(f"    first: {first.frame}  axiom_valid={first.axiom_valid} condition={first.condition_holds}")
    bad = [r["axiom"] for r in rep.records if r["mismatch_count"]]
    rep.totals = {"rows": len(rep.records), "agreeing": len(rep.records) - len(bad), "mismatching": len(bad)}
    rep.findings = len(bad)
    return rep


def report_remarks() -> Report:
    rep = Report("remarks", {})
    widths = (14, 14, 10, 6)
    rep.table.append(_pad(("name", "remark", "status", "logic"), widths))
    counts = {"Confirmed": 0, "Refuted": 0, "Unchecked": 0}
    for s in all_strengthenings():
        if s.remark is Remark.NONE:
            continue
        v = verify_remark(s)
        counts[v.status] += 1
        rec = {"name": s.name, "remark": s.remark.value, "axiom": to_text(s.instance()), "status": v.status}
        if isinstance(v, Confirmed):
            rec.update(logic=v.logic, detail=v.detail)
            if v.model is not None:
                rec["model"] = v.model.to_json()
        elif isinstance(v, Refuted):
            rec.update(logic=v.logic, evidence=v.evidence, weakest_logic=v.weakest_logic)
            if v.model is not None:
                rec["model"] = v.model.to_json()
        else:
            rec["reason"] = v.reason
        rep.records.append(rec)
        rep.table.append(_pad((s.name, s.remark.value, v.status, rec.get("logic", "-")), widths))
        if isinstance(v, Refuted):
            rep.table.append(f"    finding: {v.evidence}; weakest proving logic: {v.weakest_logic or 'none of K/T/S4/S5'}")
            if v.model is not None:
                rep.table.append(f"    model: {v.model.dumps()}")
    rep.totals = dict(rows=len(rep.records), **counts)
    rep.findings = counts["Refuted"]
    return rep


# ---------------------------------------------------------------------------
# sampled comparisons

def _compare_chunk(args) -> List[Tuple[int, List[bool]]]:
    names, seed, start, stop = args
    mats = [builtin_matrix(n) for n in names]
    out = []
    for i in range(start, stop):
        prem, concl = random_sequent(seed, i)
        out.append((i, [check_consequence(prem, concl, m, max_closure=None).valid for m in mats]))
    return out


def _sweep(names: Sequence[str], samples: int, seed: int, jobs: int, chunk: int = 500):
    tasks = [(tuple(names), seed, a, min(a + chunk, samples)) for a in range(0, samples, chunk)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_compare_chunk, tasks))
    else:
        parts = [_compare_chunk(t) for t in tasks]
    return [row for part in parts for row in part]


def _check_samples(samples: int) -> None:
    if samples < 1:
        raise ValueError("samples must be at least 1")


def _sequent_text(seed: int, i: int) -> Dict:
    prem, concl = random_sequent(seed, i)
    return {"index": i, "premises": [to_text(p) for p in prem], "conclusion": to_text(concl)}


def report_w_vs_simplified(samples: int = 10_000, seed: int = 0, jobs: int = 1) -> Report:
    _check_samples(samples)
    rep = Report("w-vs-simplified", {"samples": samples, "seed": seed})
    rows = _sweep(("W", "W_SIMPLIFIED"), samples, seed, jobs)
    agree = valid = refinement = 0
    for i, (w, ws) in rows:
        agree += w == ws
        valid += w
        if w and not ws:
            refinement += 1
        if w != ws:
            rep.records.append(dict(_sequent_text(seed, i), W=w, W_SIMPLIFIED=ws))
    rep.totals = {"samples": samples, "agreements": agree, "disagreements": samples - agree,
                  "w_valid": valid, "refinement_violations": refinement}
    rep.table.append(f"{agree}/{samples} sequents agree; {valid} valid in W")
    for r in rep.records:
        rep.table.append(f"    disagreement #{r['index']}: {', '.join(r['premises'])} |= {r['conclusion']}")
    rep.findings = samples - agree
    return rep


def report_refinement(samples: int = 1_000, seed: int = 0, jobs: int = 1) -> Report:
    """Monotonicity along W -> W_SIMPLIFIED -> TBAT and the Tarskian laws on samples."""
    _check_samples(samples)
    rep = Report("refinement", {"samples": samples, "seed": seed})
    names = ("W", "W_SIMPLIFIED", "TBAT")
    mats = {n: builtin_matrix(n) for n in names}
    chain = [refines(mats["W_SIMPLIFIED"], mats["W"]), refines(mats["TBAT"], mats["W_SIMPLIFIED"])]
    rows = _sweep(names, samples, seed, jobs)
    mono = 0
    for i, (w, ws, t) in rows:
        if (w and not ws) or (ws and not t):
            mono += 1
            rep.records.append(dict(_sequent_text(seed, i), law="refinement", W=w, W_SIMPLIFIED=ws, TBAT=t))
    tarski = 0
    m = mats["TBAT"]
    for i in range(samples):
        prem, concl = random_sequent(seed, i)
        extra, _ = random_sequent(seed + 1, i)
        law_rows = []
        # reflexivity: the conclusion follows from itself plus anything
        law_rows.append(("reflexivity", check_consequence(prem + (concl,), concl, m, max_closure=None).valid))
        holds = check_consequence(prem, concl, m, max_closure=None).valid
        if holds and extra:
            law_rows.append(("monotonicity", check_consequence(prem + extra[:1], concl, m, max_closure=None).valid))
        if prem:
            mid = prem[-1]
            lead = prem[:-1]
            if check_consequence(lead, mid, m, max_closure=None).valid and holds:
                law_rows.append(("cut", check_consequence(lead, concl, m, max_closure=None).valid))
        for law, ok in law_rows:
            if not ok:
                tarski += 1
                rep.records.append(dict(_sequent_text(seed, i), law=law))
    rep.totals = {"samples": samples, "matrix_chain_refines": all(chain),
                  "refinement_violations": mono, "tarski_violations": tarski}
    rep.table.append(f"W_SIMPLIFIED refines W: {chain[0]}; TBAT refines W_SIMPLIFIED: {chain[1]}")
    rep.table.append(f"refinement violations: {mono}; Tarskian violations: {tarski}")
    rep.findings = mono + tarski + (not all(chain))
    return rep


def report_tbat_variants(samples: int = 2_000, seed: int = 0) -> Report:
    """Where the corrected table and the original (f -> R gives {P,t}) part ways."""
    _check_samples(samples)
    new, old = builtin_matrix("TBAT"), builtin_matrix("TBAT_ORIGINAL")
    rep = Report("tbat-variants", {"samples": samples, "seed": seed})
    rep.table.append(f"TBAT refines TBAT_ORIGINAL: {refines(new, old)}")
    system = builtin_system("TBAT")
    separators = 0
    for name, schema in system.schemas:
        f = fresh_instance(schema)
        a = check_consequence([], f, new, max_closure=None)
        b = check_consequence([], f, old, max_closure=None)
        if a.valid != b.valid:
            separators += 1
            rep.records.append({"source": f"schema {name}", "sequent": to_text(f), "TBAT": a.valid,
                                "TBAT_ORIGINAL": b.valid, "witness": b.witness.as_dict() if b.witness else None})
            rep.table.append(f"  schema {name}: TBAT={a.valid} TBAT_ORIGINAL={b.valid}")
    sampled = 0
    for i in range(samples):
        prem, concl = random_sequent(seed, i)
        a = check_consequence(prem, concl, new, max_closure=None).valid
        b = check_consequence(prem, concl, old, max_closure=None).valid
        if a != b:
            sampled += 1
            rep.records.append(dict(_sequent_text(seed, i), source="sample", TBAT=a, TBAT_ORIGINAL=b))
    rep.table.append(f"schema separators: {separators}; sampled separators: {sampled}/{samples}")
    rep.totals = {"refines": refines(new, old), "schema_separators": separators, "sampled_separators": sampled}
    return rep


def build_report(name: str, samples: Optional[int] = None, seed: int = 0, jobs: int = 1,
                 max_n: int = 3, cls: str = "all") -> Report:
    if name == "strengthenings":
        return report_strengthenings()
    if name == "correspondence":
        return report_correspondence(max_n=max_n, cls=cls, jobs=jobs)
    if name == "remarks":
        return report_remarks()
    if name == "w-vs-simplified":
        return report_w_vs_simplified(10_000 if samples is None else samples, seed, jobs)
    if name == "refinement":
        return report_refinement(1_000 if samples is None else samples, seed, jobs)
    if name == "tbat-variants":
        return report_tbat_variants(2_000 if samples is None else samples, seed)
    raise KeyError(f"unknown report {name!r}; expected one of {', '.join(REPORT_NAMES)}")
