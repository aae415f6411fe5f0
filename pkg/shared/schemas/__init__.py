# Shared Schemas Package
