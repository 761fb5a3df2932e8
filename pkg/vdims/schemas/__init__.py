# Report and API models
