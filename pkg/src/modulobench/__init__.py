"""Planning and scheduling verification toolkit with a generate-and-test loop."""
