"""Fast direct solver for 2D Helmholtz transmission scattering by many inclusions."""
