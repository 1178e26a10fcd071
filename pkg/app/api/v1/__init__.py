# API v1: versioned API routes
