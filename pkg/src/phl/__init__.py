"""Decentralized personal health library.

Multi-pod linked-data server with web access control, linked-data
notifications, a link-following federated query engine, and a
context-aware self-management recommender.
"""

__version__ = "0.1.0"
