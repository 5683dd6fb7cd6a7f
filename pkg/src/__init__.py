# Learner lab: repeated games against no-regret learners
