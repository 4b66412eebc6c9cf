"""hrtfaudit: harmonise HRIR corpora and audit setup identifiability."""

__version__ = "0.1.0"
