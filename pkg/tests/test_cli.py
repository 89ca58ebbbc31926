"""
命令行测试 - 配置校验、hash、输出文件头与退出码
"""

import json

import numpy as np
import pytest

from errors import ConfigError, GeometryError, GLVortexError, OutputError, to_jsonable
from experiments.config_loader import config_hash, load_config, load_source, parse_config
from experiments.output import ExperimentOutputManager
from main import main


def write_json(path, payload):
    path.write_text(json.dumps(payload), encoding='utf-8')
    return path


class TestConfig:

    def test_hash_is_deterministic(self):
        raw = {'surface': {'kind': 'sphere', 'refine': 2}, 'epsilons': [0.1, 0.05]}
        reordered = {'epsilons': [0.1, 0.05], 'surface': {'refine': 2, 'kind': 'sphere'}}
        assert config_hash(raw) == config_hash(reordered)
        assert len(config_hash(raw)) == 16
        assert config_hash(raw) != config_hash({**raw, 'seed': 1})

    def test_defaults(self):
        experiment = parse_config({'surface': {'kind': 'sphere'}})
        assert experiment.model == 'extrinsic'
        assert len(experiment.epsilons) == 1
        assert experiment.section('flow')['scheme'] == 'semi_implicit'
        assert experiment.overrides('flow') == {}

    @pytest.mark.parametrize("raw", [
        {},
        {'surface': {'kind': 'sphere'}, 'epsilons': [0.05, 0.1]},
        {'surface': {'kind': 'sphere'}, 'epsilons': [0.1, -0.05]},
        {'surface': {'kind': 'sphere'}, 'model': 'magnetic'},
        {'surface': {'kind': 'sphere'}, 'vortices': {'points': [[0, 0, 1]], 'degrees': [1, 1]}},
        {'surface': {'kind': 'sphere'}, 'vortices': {'points': [[0, 0, 1]], 'degrees': [1.5]}},
        {'surface': {'kind': 'sphere'}, 'vortices': {'integers': [0], 'xi': [0.0]}},
        {'surface': {'kind': 'sphere'}, 'flow': {'dt': -1.0}},
    ])
    def test_invalid_configs(self, raw):
        with pytest.raises(ConfigError):
            parse_config(raw)

    def test_bare_descriptor(self, tmp_path):
        path = write_json(tmp_path / 'torus.json', {'kind': 'torus', 'nu': 16, 'nv': 8})
        experiment = load_config(path)
        assert experiment.name == 'torus'
        assert experiment.surface['kind'] == 'torus'

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / 'absent.json')

    def test_invalid_json(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"surface": ', encoding='utf-8')
        with pytest.raises(ConfigError):
            load_config(path)

    def test_mesh_source(self, tmp_path):
        with pytest.raises(ConfigError):
            load_source(tmp_path / 'absent.off')


class TestErrors:

    def test_error_record(self):
        error = GeometryError("bad mesh", diagnostic={'count': np.int64(3), 'values': np.arange(2)})
        record = error.to_dict()
        assert record['error'] == 'GeometryError'
        assert record['module'] == 'surface-geometry'
        assert record['diagnostic'] == {'count': 3, 'values': [0, 1]}
        json.dumps(record)

    def test_hierarchy(self):
        assert issubclass(ConfigError, GLVortexError)
        assert issubclass(ConfigError, ValueError)

    def test_jsonable_handles_numpy(self):
        assert json.dumps(to_jsonable({'x': np.float64(1.5), 'flags': np.array([True])}))


class TestOutput:

    def test_csv_header(self, tmp_path):
        output = ExperimentOutputManager()
        path = output.write_csv(tmp_path / 'a.csv', ['t', 'energy'], [(0.0, 1.0), (0.5, 0.75)], 'abc123')
        lines = path.read_text(encoding='utf-8').splitlines()
        assert lines[0].startswith('# glvortex schema=')
        assert lines[0].endswith('config_hash=abc123')
        assert lines[1] == 't,energy'
        assert len(lines) == 4

    def test_row_length_checked(self, tmp_path):
        output = ExperimentOutputManager()
        with pytest.raises(OutputError) as info:
            output.write_csv(tmp_path / 'b.csv', ['t', 'energy'], [(0.0,)], 'abc123')
        assert info.value.to_dict()['module'] == 'cli-harness'
        assert info.value.diagnostic == {'row': 0, 'length': 1, 'columns': 2}

    def test_json_record(self, tmp_path):
        output = ExperimentOutputManager()
        path = output.write_json(tmp_path / 'r.json', {'value': np.float64(2.0)}, 'abc123')
        record = json.loads(path.read_text(encoding='utf-8'))
        assert record['config_hash'] == 'abc123'
        assert record['value'] == 2.0
        assert 'schema_version' in record


class TestMain:

    def test_info(self, tmp_path):
        config_path = write_json(tmp_path / 'sphere.json', {'kind': 'sphere', 'refine': 2})
        out = tmp_path / 'out'
        assert main(['info', '--config', str(config_path), '--out', str(out)]) == 0
        report = json.loads((out / 'info.json').read_text(encoding='utf-8'))
        assert report['genus'] == 0
        assert report['euler_characteristic'] == 2
        assert report['harmonic_dimension'] == 0
        assert report['config_hash'] == load_config(config_path).hash
        assert (out / 'surface.off').exists()

    def test_inadmissible_degrees(self, tmp_path, capsys):
        raw = {'name': 'bad', 'surface': {'kind': 'sphere', 'refine': 2},
               'vortices': {'points': [[0, 0, 1], [0, 0, -1]], 'degrees': [1, 0]}}
        config_path = write_json(tmp_path / 'bad.json', raw)
        code = main(['simulate', '--config', str(config_path), '--out', str(tmp_path / 'out')])
        assert code == 1
        record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert record['error'] == 'AdmissibilityError'
        assert record['module'] == 'renormalized-energy'

    def test_missing_vortices(self, tmp_path, capsys):
        config_path = write_json(tmp_path / 'empty.json', {'surface': {'kind': 'sphere', 'refine': 2}})
        assert main(['effective', '--config', str(config_path), '--out', str(tmp_path / 'out')]) == 1
        record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert record['error'] == 'ConfigError'

    def test_missing_config(self, tmp_path, capsys):
        assert main(['info', '--config', str(tmp_path / 'absent.json')]) == 2
        record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert record['module'] == 'cli-harness'

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(['render', '--config', 'x.json'])
