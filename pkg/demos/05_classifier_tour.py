"""Verdicts for a handful of space pairs, with their derivations.

Run: python3 demos/05_classifier_tour.py
"""

from minmod.classifier import explain

PAIRS = [("lp:2", "lp:2"), ("lp:1", "lp:1"), ("lp:1", "c0"), ("c0", "c0"),
         ("sum(lp:2,lp:3;outer=3)", "sum(lp:2,lp:2;outer=2)"),
         ("sum(lp:2,flp:2:1;outer=1)", "sum(lp:2,flp:2:1;outer=2)"), ("lp:1.5", "james")]

for X, Y in PAIRS:
    print(explain(X, Y))
    print()
