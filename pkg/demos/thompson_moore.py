"""Tree diagrams of comb transpositions and the Moore relations they satisfy."""
from rw2 import presets as P
from rw2 import thompson as TM

sc = P.sym_catalan(2)
m = 5
comb = TM.tree_of_term(TM.left_comb(2, m))
perms = {}
for i in range(1, m):
    d = TM.theta(sc, TM.comb_transposition_word(m, i))
    perms[i] = TM.expand_dom_to(d, comb).perm
    print(f"T{i}: {d}")

ident = tuple(range(m))


def prod(*ps):
    out = ident
    for p in ps:
        out = TM.compose_perm(out, p)
    return out


print("T_i^2 = 1:", all(prod(perms[i], perms[i]) == ident for i in perms))
print("(T_i T_i+1)^3 = 1:", all(prod(*[perms[i], perms[i + 1]] * 3) == ident for i in range(1, m - 1)))
print("distant commute:", all(prod(perms[i], perms[k], perms[i], perms[k]) == ident
                              for i in perms for k in perms if k >= i + 2))
