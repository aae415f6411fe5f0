# Shared Utils Package
