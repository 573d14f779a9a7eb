"""Benchmark harness: experiments, reports and the ``bench`` CLI."""
