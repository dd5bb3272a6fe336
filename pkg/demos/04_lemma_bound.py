"""
Estimates against the lemma's bound
===================================

J = Z/2, f = (1, 0), q = 5.  With rho equal to the minimal number of module
generators, the probability of a surjection onto an extension of J by an
F_5[J]-module stays below the bound once the walk on K' x| J has mixed.
Here eps(l) is read off the exact law on that group.
"""

# %%
from randpres import groups
from randpres.experiments import estimate_surjection_probability, lemma_bound, walk_epsilon
from randpres.schreier import build_split_extension, build_system, min_module_generators
from randpres.walk import build_chain, mixing_length

sys_ = build_system(groups.cyclic(2), (1, 0), 5)
m = min_module_generators(sys_).value
chain = build_chain(build_split_extension(sys_))
print("m =", m, "|H| =", chain.group.order, mixing_length(chain, 0.1, max_l=200))

# %%
print(" l    eps      estimate          bound(2+2eps)  bound(1+eps)")
for l in range(4, 41, 4):
    e = walk_epsilon(sys_, l, chain).epsilon
    est = estimate_surjection_probability(sys_, l, m, 10000, seed=3)
    b2 = lemma_bound(e, m, sys_.q, 2, stated=True)
    b1 = lemma_bound(e, m, sys_.q, 2, stated=False)
    print(f"{l:2d}  {e:7.4f}  {est.estimate:.4f} +/- {est.half_width:.4f}  {b2:9.4f}  {b1:9.4f}")

# %%
# The estimate counts failure for any irreducible constituent at once.  Here
# K' is E+ + E+ + E- (trivial and sign characters), and the lemma bounds one
# constituent at a time, so the (1+eps) column can sit just below the
# estimate while the sum over constituents does not.
from randpres.fqlin import generation_probability

per_E = [(1 - generation_probability(5, 2, 2)) / 4, (1 - generation_probability(5, 1, 2)) / 4]
limit = (1 - generation_probability(5, 2, 2) * generation_probability(5, 1, 2)) / 4
print("limit of the event:", round(limit, 4))
print("aperiodic per-constituent limits:", [round(x, 4) for x in per_E], "sum", round(sum(per_E), 4))

# %%
# odd f-images: relators of odd length never lie in K
odd = build_system(groups.cyclic(2), (1, 1), 5)
print([estimate_surjection_probability(odd, l, 2, 5000, seed=1).estimate for l in range(1, 10)])
