"""Trend-manipulation, bot and hashtag-topic analysis for tweet corpora."""

__version__ = "0.1.0"

# Persisted models, bundles and vectorizers carry this version.
SCHEMA_VERSION = 1
