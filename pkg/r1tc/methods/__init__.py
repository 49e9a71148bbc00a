"""Completion methods: minor system, graph iteration and the SDP relaxations."""
