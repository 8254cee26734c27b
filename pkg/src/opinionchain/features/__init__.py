"""Per-IPU feature extraction: segmentation, n-grams, embeddings,
lexicon scores, linguistic patterns, paralinguistic counts, and
train-fitted standardization."""
