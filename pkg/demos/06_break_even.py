#!/usr/bin/env python3
"""When does a small fine-tuned model beat direct LLM inference on FLOPs?

The one-off cost of the small model is the LLM-annotated training set plus
fine-tuning. Each served request then costs a fraction of an LLM call, so
there is a break-even request count, and it approaches the training set size
as the LLM estimate grows.
"""

from usagekit import FeasibilityModel, break_even, flops_per_token
from usagekit.feasibility import format_table, reference_table, llm_request_cost, total_training_cost

print("reference estimates (per-request FLOPs):")
print(format_table(reference_table()))
print()

# a custom estimate, e.g. a 70B-parameter labeler
model = FeasibilityModel(llm_flops_per_token=flops_per_token(70e9))
print("custom 70B-parameter estimate:")
print(f"  LLM cost per request:  {llm_request_cost(model):.3e} FLOPs")
print(f"  one-off training cost: {total_training_cost(model):.3e} FLOPs")
print(f"  break-even:            {break_even(model):,} requests")
print()

# a tiny LLM that is cheaper per request than the small model never pays off
cheap = FeasibilityModel(llm_flops_per_token=1e9)
print(f"1B-parameter labeler break-even: {break_even(cheap)}  (never pays off)")
