"""Documents, corpus, fuzzer, theorem driver and command line."""
