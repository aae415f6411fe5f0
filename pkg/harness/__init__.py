# CLI, configuration ingestion, seeded runner and report emission
