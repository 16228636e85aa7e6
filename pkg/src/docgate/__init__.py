"""docgate: a federated document-access gateway for library consortia.

One summary server carries the catalogue (journal-issue summaries, search,
alerts, statistics); each institution runs a document server holding its
full texts; a binder maps bibliographic references to editor URLs; and a
policy engine routes every article request to the legally correct delivery
mode, emitting billing and copyright payment records along the way.
"""

__version__ = "0.1.0"
