#!/usr/bin/env python3
"""Filter a toy review dump and draw the corpus splits."""

import datetime as dt

from usagekit.dataset import FilterConfig, Review, preprocess, split_reviews, strip_html


def review(i, **overrides):
    fields = dict(
        review_id=f"R{i}",
        customer_id=f"C{i}",
        product_title="Folding stand",
        product_category="Kitchen",
        review_headline="works",
        review_body="holds my tablet while I cook dinner",
        review_date=dt.date(2015, 6, 1),
        verified_purchase=True,
        vine=False,
    )
    fields.update(overrides)
    return Review(**fields)


raw = [
    review(0),
    review(1, review_body="Bad."),                                # too short
    review(2, product_category="Books"),                          # excluded category
    review(3, verified_purchase=False),                           # neither verified nor vine
    review(4, review_body=" ".join(["word"] * 500)),              # truncated to 400
    review(5, review_body=strip_html("use it <b>daily</b> for &quot;recipes&quot;")),
]
raw += [review(100 + i, customer_id="BOT") for i in range(31)]    # bot-like customer

kept, stats = preprocess(raw, FilterConfig())

print("filter stats:")
for key, value in stats.to_dict().items():
    print(f"  {key:>18}: {value}")
print("kept review ids:", [r.review_id for r in kept])
print()

# splits need 4,252+ reviews; synthesize enough
pool = [review(i) for i in range(5000)]
splits = split_reviews(pool, seed=7)
print("split sizes:", {name: len(part) for name, part in splits.items()})
print("first evaluation id (seed 7):", splits["evaluation"][0].review_id)
print("same seed, same split:",
      splits["evaluation"][0] == split_reviews(pool, seed=7)["evaluation"][0])
