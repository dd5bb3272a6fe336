"""
Random reduced words in a finite group
======================================

The image of a uniform reduced word of length l in a marked group is the
group marginal of a non-backtracking walk.  Exact iteration shows it
converging to uniform, or to uniform on the two cosets of an index-2
subgroup when the walk has period 2.
"""

# %%
import numpy as np

from randpres import groups
from randpres.walk import build_chain, index2_subgroup, is_irreducible, mixing_length, period, summed_distribution

# %%
# S_3 marked by a transposition and a 3-cycle: irreducible and aperiodic
s3 = groups.symmetric(3)
chain = build_chain(s3)
print("states:", chain.n_states, "irreducible:", is_irreducible(chain), "period:", period(chain))
for l in (1, 2, 5, 10, 25):
    print(l, np.round(summed_distribution(chain, l), 6))
print(mixing_length(chain, 1e-6, max_l=200))

# %%
# Z/4 marked by 1 and 3: both marks are odd, so even words land in {0, 2}
z4 = groups.cyclic(4, [1, 3])
chain = build_chain(z4)
print("period:", period(chain), "H =", index2_subgroup(chain).members)
for l in (10, 11, 30, 31):
    print(l, np.round(summed_distribution(chain, l), 8))
print(mixing_length(chain, 1e-6, max_l=200))

# %%
# marks generating a proper subgroup leave the walk reducible
print("Z/4 marked by 2, 2 irreducible:", is_irreducible(build_chain(groups.cyclic(4, [2, 2]))))
