"""Algorithm loop, batch replication and run monitoring."""
