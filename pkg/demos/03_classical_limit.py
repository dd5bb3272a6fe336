"""
Two random relators and H_1 mod 3
=================================

With J trivial, two random relators generate F_3^2 with probability tending
to (1 - 1/3)(1 - 1/9) = 16/27 as the relator length grows.  The exact value
at finite l comes from the walk on F_3^2 itself.
"""

# %%
from randpres import groups
from randpres.experiments import estimate_surjection_probability, exact_surjection_probability
from randpres.fqlin import generation_probability
from randpres.schreier import build_system

sys_ = build_system(groups.trivial(), (0, 0), 3)
limit = generation_probability(3, 2, 2)
print("limit P(generate) =", limit)

# %%
print(" l   exact P(generate)   Monte Carlo (2*10^4 trials)")
for l in (1, 2, 3, 4, 6, 10, 20, 50):
    exact = 1 - exact_surjection_probability(sys_, l, 2)
    mc = estimate_surjection_probability(sys_, l, 2, 20000, seed=l)
    print(f"{l:2d}   {exact:.6f}            {1 - mc.estimate:.4f} +/- {mc.half_width:.4f}")
