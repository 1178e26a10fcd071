# API routes: all endpoint definitions
