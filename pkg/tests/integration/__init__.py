"""Integration tests for GFX JSON Sync Agent."""
