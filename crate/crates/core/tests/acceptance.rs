// placeholder; full acceptance suite below
