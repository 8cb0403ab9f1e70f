"""Basic diamonds of the nested and disjoint counterexample theories."""
from rw2 import diamond as D
from rw2 import presets as P
from rw2.dsl import parse_term

for th, seed in ((P.nested_cex(), "I(I(a))"), (P.disjoint_cex(), "I(a)⊗I(a)")):
    g = D.build_graph(th, [parse_term(seed, th)], 6)
    found = D.basic_diamonds(g, th)
    print(f"{th.name}: {len(g.vertices)} vertices, {len(g.edges)} edges, {len(found)} basic diamonds")
    for p in found:
        print("  ", D.show_pair(g, p))

th, _ = P.branching_cex()
rep = D.reverse_branching_check(th)
print("branching:", rep.status, "family", [th.show(t) for t in rep.family[:3]])
