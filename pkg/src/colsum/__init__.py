"""colsum: abstractive summarization of document collections.

Clusters a document collection into semantic topics, reduces each topic to
semantic chunks, summarizes chunks hierarchically through a pluggable
completion backend, scores sentiment at sentence/chunk/topic granularity,
evaluates with ROUGE, and exports a dashboard document.
"""

__version__ = "0.1.0"
