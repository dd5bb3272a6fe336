"""
The relation module of a finite quotient
========================================

For f: F(x_1, x_2) -> Z/2 sending x_1 to the generator and x_2 to 0, the
kernel K is free of rank 3 and K' = H_1(K; F_q) is a module over F_q[Z/2].
Words map into the split extension K' x| Z/2 by a crossed homomorphism.
"""

# %%
import numpy as np

from randpres import groups
from randpres.groups import evaluate
from randpres.schreier import (
    build_split_extension,
    build_system,
    crossed_evaluate,
    min_module_generators,
    module_generates,
)
from randpres.words import ReducedWord

sys_ = build_system(groups.cyclic(2), (1, 0), 3)
print("D =", sys_.D)
print("transversal:", [str(w) or "e" for w in sys_.transversal])
for c in range(sys_.D):
    print("column", c, "generator", sys_.generator_word(c))

# %%
# the nontrivial element of J permutes the Schreier generators
print(sys_.action[1])

# %%
for text in ["1 1", "2", "1 2 -1", "1"]:
    img = crossed_evaluate(sys_, ReducedWord.parse(text, 2))
    print(f"{text:8s} -> vector {img.vector}, J-part {img.jpart}")

# %%
# a single relator never generates; two can
r = min_module_generators(sys_)
print("minimal generators:", r.value, "certified" if r.exact else "upper bound")
x2 = crossed_evaluate(sys_, ReducedWord.parse("2", 2)).vector
print("x_2 alone generates:", module_generates(sys_, [x2]))
print("witness pair:", r.witness.tolist(), module_generates(sys_, r.witness))

# %%
# evaluation in the finite group K' x| J agrees with the crossed homomorphism
H = build_split_extension(sys_)
w = ReducedWord.parse("1 2 2 -1 2 1", 2)
h = evaluate(H, w)
print(H.order, divmod(h, 3**sys_.D), crossed_evaluate(sys_, w))
