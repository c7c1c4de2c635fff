"""tweetinfo: informative COVID-19 tweet classification."""
