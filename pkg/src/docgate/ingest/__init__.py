"""Feed ingestion: provider adapters, the pivot exchange format, coherence
validation, filtered storage in a file hierarchy, raw archiving, and the
pluggable service-module pipeline that ties them together."""
