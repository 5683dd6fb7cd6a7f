# Data models for games, learners, policies and experiments
