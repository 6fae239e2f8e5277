"""ATTN1 attention dump sidecar."""

from .dump import DumpJob, SourceSample, dump, lex_words, samples_from_files, samples_from_records
