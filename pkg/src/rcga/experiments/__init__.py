"""Sweeps, verification suites and configuration for the command line and MCP server."""
