"""Translation-suggestion toolkit.

Builds synthetic translation-suggestion corpora from parallel text, trains a
segment-aware Transformer that generates alternatives for masked spans in
machine translations, and serves suggestions to an interactive post-editing
workbench.
"""

__version__ = "0.1.0"
