# File IO and the run logger
