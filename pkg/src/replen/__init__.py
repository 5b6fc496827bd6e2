"""Agentic retail replenishment: six coordinated agents over a seeded
supermarket-world simulator, with ensemble decision synthesis, approval
gates, an append-only audit log, MCP tool servers, and a headless CLI."""

__version__ = "0.1.0"
