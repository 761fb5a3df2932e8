# Report endpoints
