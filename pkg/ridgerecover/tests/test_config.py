# -*- coding: utf-8 -*-
import json
import os
import shutil
import tempfile
import unittest
from unittest import mock

from ridgerecover.config import CONFIG_ENV, DEFAULTS, load_config, make_config, save_config
from ridgerecover.schemautil import ConfigError


class TestConfig(unittest.TestCase):

    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def write(self, name, text):
        path = os.path.join(self.tmpdir, name)
        with open(path, 'w') as f:
            f.write(text)
        return path

    def test_defaults(self):
        config = make_config()
        for key, value in DEFAULTS.items():
            self.assertEqual(getattr(config, key), value)

    def test_load_file(self):
        path = self.write('experiment.json', json.dumps({'d': 12, 'p': 0.5, 'S': 2, 'seeds': [1, 2, 3]}))
        config = load_config(path)
        self.assertEqual((config.d, config.p, config.S, config.seeds), (12, 0.5, 2, [1, 2, 3]))
        self.assertEqual(config.epsilon, DEFAULTS['epsilon'])

    def test_environment(self):
        path = self.write('env.json', json.dumps({'mode': 'exhaustive', 'd': 4}))
        with mock.patch.dict(os.environ, {CONFIG_ENV: path}):
            self.assertEqual(load_config().mode, 'exhaustive')
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(load_config(), make_config())

    def test_save_and_load(self):
        config = make_config(d=7, r=2.5, budget_grid=[10, 100], c_r_spline=0.2)
        path = os.path.join(self.tmpdir, 'saved.json')
        save_config(config, path)
        self.assertEqual(load_config(path), config)

    def test_replace(self):
        config = make_config().replace(d=20, seeds=[4])
        self.assertEqual((config.d, config.seeds), (20, [4]))
        with self.assertRaises(ConfigError):
            config.replace(S=20)

    def test_sparsity_below_dimension(self):
        with self.assertRaises(ConfigError):
            make_config(d=5, S=5)

    def test_unknown_key(self):
        with self.assertRaises(ConfigError):
            make_config({'dimension': 3})

    def test_unknown_family(self):
        with self.assertRaises(ConfigError) as context:
            make_config(profile_family='polynomial')
        self.assertIn('sine', str(context.exception))
        self.assertEqual(make_config(profile_family='mixed').profile_family, 'mixed')

    def test_report_marks_offending_line(self):
        with self.assertRaises(ConfigError) as context:
            make_config(epsilon=2.0)
        self.assertIn('epsilon', str(context.exception))
        self.assertIn('>>>', context.exception.report)
        self.assertEqual(context.exception.category, 'config')

    def test_bad_files(self):
        with self.assertRaises(ConfigError):
            load_config(self.write('broken.json', '{"d": 4,'))
        with self.assertRaises(ConfigError):
            load_config(self.write('list.json', '[1, 2]'))
        with self.assertRaises(ConfigError):
            load_config(os.path.join(self.tmpdir, 'missing.json'))


if __name__ == '__main__':
    unittest.main()
