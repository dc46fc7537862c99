"""pytest wiring: absltest normally parses flags in absltest.main().

Under pytest that never runs, so mark absl flags as parsed (using their
defaults) so that create_tempdir/create_tempfile can read --test_tmpdir.
"""

from absl import flags


def pytest_configure(config):
  del config
  if not flags.FLAGS.is_parsed():
    flags.FLAGS.mark_as_parsed()
