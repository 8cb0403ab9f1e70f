"""Certify the monoidal theory and tile two routes around a four-fold tensor."""
import random

from rw2 import coherence as C
from rw2 import presets as P
from rw2.dsl import parse_term
from rw2.prooft import Path, check_tiling

th = P.monoidal()
verdict = C.maclane_verdict(th)
print("verdict:", verdict.status)
for sid, j in verdict.certificate.joinings.items():
    print(f"  {sid:24} closed by {j.commutes_by}, {len(j.tiling.faces)} faces")

pos = verdict.certificate.theory
s = parse_term("a⊗(b⊗(c⊗(d⊗e)))", th)
left = Path(s, C.random_nf_path(pos, s, random.Random(1)))
right = C.nf_path(pos, s)
tiling = C.prove_equal_to_nf(verdict.certificate, left, right)
print("routes:", len(left.letters), "and", len(right.letters), "steps;",
      len(tiling.faces), "faces; checked:", bool(check_tiling(pos, (left, right), tiling)))
