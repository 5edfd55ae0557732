"""rcga: r-valued compact GA simulator and drift-lemma verification toolkit."""
