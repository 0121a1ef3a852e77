"""End-to-end walkthrough on a ten-line corpus: train a dependency-matrix
model, infer a vector for an unseen word from one slotted sentence, and look
at the per-context-word diagnostics and the nearest neighbors.

Run:  python3 demos/inference_walkthrough.py
"""

import io
import sys

from depfew import (
    FewShotContext,
    FSLConfig,
    Inferencer,
    ParsedSentence,
    TrainerConfig,
    Token,
    build_vocabulary,
    nearest_neighbors,
    train,
    write_diagnostics,
)


def sentence(rows):
    """rows: (form, head, deprel) with 1-based heads, 0 = root."""
    return ParsedSentence(tuple(
        Token(i, form, head, deprel)
        for i, (form, head, deprel) in enumerate(rows, start=1)))


def main():
    # a tiny world: fires and floods each destroy and spread, pets just sleep
    corpus = []
    for _ in range(200):
        corpus += [
            sentence([("the", 2, "det"), ("fire", 3, "nsubj"),
                      ("destroyed", 0, "root"), ("the", 5, "det"),
                      ("village", 3, "obj")]),
            sentence([("the", 2, "det"), ("flood", 3, "nsubj"),
                      ("destroyed", 0, "root"), ("the", 5, "det"),
                      ("harvest", 3, "obj")]),
            sentence([("the", 2, "det"), ("fire", 3, "nsubj"),
                      ("spread", 0, "root"), ("quickly", 3, "advmod")]),
            sentence([("the", 2, "det"), ("cat", 3, "nsubj"),
                      ("slept", 0, "root"), ("quietly", 3, "advmod")]),
            sentence([("the", 2, "det"), ("dog", 3, "nsubj"),
                      ("slept", 0, "root"), ("quietly", 3, "advmod")]),
        ]
    vocab = build_vocabulary(corpus)
    result = train(corpus, vocab,
                   TrainerConfig(model_kind="dep-matrix", dim=24, epochs=10,
                                 subsample_tau=1.0, seed=2),
                   progress=None)
    print(f"trained on {len(corpus)} sentences, {len(vocab)} words\n")

    # one sighting of an unknown word.  Its informative words ("destroyed",
    # "quickly") are one arc away but linearly distant; the misleading
    # "slept" sits right next to the slot yet four arcs away in the parse.
    # Window weighting alone favors the confound (0.8 vs 0.4 + 0.2); the
    # 1 + 1/d factor flips the balance (1.25 * 0.8 vs 2 * 0.4 + 2 * 0.2).
    slotted = sentence([("the", 2, "det"), ("___", 6, "nsubj"),
                        ("that", 6, "obl"), ("slept", 5, "nmod"),
                        ("of", 3, "nmod"), ("destroyed", 0, "root"),
                        ("quickly", 2, "amod")])
    context = FewShotContext.from_sentences([slotted])

    for method in ("additive", "dep-additive", "dm-additive"):
        cfg = FSLConfig(tau=1.0, k=0, method=method)
        mats = result.matrices if method == "dm-additive" else None
        inferencer = Inferencer(result.space, cfg, mats)
        records = []
        vector = inferencer.infer(context, diagnostics=records)
        neighbors = nearest_neighbors(result.space, vector, 4)
        names = ", ".join(f"{w} ({c:.3f})" for w, c in neighbors)
        print(f"{method:13s} nearest neighbors: {names}")

        buf = io.StringIO()
        write_diagnostics(records, buf)
        table = "\n".join("  " + line for line in buf.getvalue().splitlines())
        print(f"{table}\n")


if __name__ == "__main__":
    main()
