"""Throughput analysis for multi-antenna wireless-powered links."""
