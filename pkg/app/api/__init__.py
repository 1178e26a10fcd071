# API layer: routes, middleware wiring, exception handlers
