"""Sample every relation family of the seed-operator monoid on the binary Catalan theory."""
import random
from collections import Counter

from rw2 import presets as P
from rw2 import structmon as SM

th = P.catalan(2)
rng = random.Random(0)
for family in SM.RELATION_FAMILIES:
    tally = Counter(SM.random_relation(th, family, rng).evaluate() for _ in range(50))
    print(f"{family:14} {dict(tally)}")

op = SM.word_operator(th, [("alpha1", ()), ("alpha1", ())])
print("alpha1 ; alpha1 =", op.show(th))
