#!/usr/bin/env python3
"""Walkthrough of the set-to-set scores: S4 against one reference set and
MS4 against several.

Run:  python demos/01_set_scores.py
"""

from usagekit import deterministic_similarity, exact_match_similarity, ms4, option_set, s4

# The exact-match stub scores string pairs 1/0, which makes every number
# below reproducible by hand.
exact = exact_match_similarity()

pred = option_set(["home BBQs", "smoke vegetables"])
ref = option_set(["home BBQs"])

print("prediction:", pred)
print("reference: ", ref)
print()

# Precision direction: both predicted strings weigh 0.5 each; one of them
# has a perfect match, the other none -> 0.5. Recall direction: the lone
# reference string is matched perfectly -> 1.0. Harmonic mean: 2/3.
print("S4(pred, ref)    =", s4(pred, ref, exact))

# Empty-set conventions
print("S4({}, {})       =", s4((), (), exact))
print("S4(pred, {})     =", s4(pred, (), exact))

# Multiple reference sets: MS4 takes the best match
refs = (option_set(["grilling"]), option_set(["home BBQs", "smoke vegetables"]))
print("MS4(pred, refs)  =", ms4(pred, refs, exact))
print()

# With real embeddings the scores become graded instead of 0/1. The bundled
# deterministic embedder has no semantics (it hashes character trigrams) but
# behaves like an embedding model API-wise and is fully reproducible.
fuzzy = deterministic_similarity()
pairs = [
    ("portable power bank", "portable power bank"),
    ("portable power bank", "portable power banks"),
    ("portable power bank", "flashlight"),
]
print("pairwise sim under the deterministic test embedder:")
for a, b in pairs:
    print(f"  sim({a!r}, {b!r}) = {fuzzy(a, b):.4f}")

print()
print("S4 with graded similarity:",
      f"{s4(pred, option_set(['home BBQ', 'smoked veggies']), fuzzy):.4f}")
