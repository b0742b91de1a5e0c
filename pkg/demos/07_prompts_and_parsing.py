#!/usr/bin/env python3
"""Render the built-in labeling prompts and parse model answers back into
usage-option sets, including the failure modes that the strict parser
flags as format violations.
"""

from usagekit.annotation import (
    CHAIN_OF_THOUGHT,
    PLAIN,
    build_prompt,
    builtin_template,
    parse_response,
)

template = builtin_template(PLAIN, 2)
request = build_prompt(template, "Great little stand, I use it to hold my tablet while cooking.")

print(f"--- {template.name}: {len(request.messages)} messages, temperature {request.temperature}")
for message in request.messages:
    body = message.content if len(message.content) < 72 else message.content[:69] + "..."
    print(f"[{message.role}] {body}")
print()

answers = [
    (PLAIN, "hold tablet while cooking"),
    (PLAIN, "No usage options"),
    (PLAIN, "hold tablet; prop up cookbooks"),
    (CHAIN_OF_THOUGHT, "The author props a tablet on it.\n\nResult: hold tablet"),
    (CHAIN_OF_THOUGHT, "it can hold a tablet (no marker given)"),
    (PLAIN, "this stand is a wonderful thing that can hold your tablet cookbook "
            "phone and more while you cook bake or clean around the kitchen"),
]

print("parsing model answers:")
for style, raw in answers:
    options, status = parse_response(raw, style)
    shown = raw.replace("\n", "\\n")
    if len(shown) > 56:
        shown = shown[:53] + "..."
    print(f"  [{style:>16}] {shown!r}")
    print(f"{'':21}-> {options or '{}'} ({status})")
