# Shared Config Package
