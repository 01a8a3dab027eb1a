import pytest

from homoverlap import estimate
from homoverlap.apparatus import ApparatusParams
from homoverlap.config import RunConfig, format_config, load_config, parse_config
from homoverlap.countsio import emit_counts, format_counts, ingest_counts, parse_counts
from homoverlap.exceptions import ConfigError, CountsParseError
from homoverlap.mcsim import Mixing, Preparation, RngStream, run_measurement

HEADER = "period_index,delay_um,duration_s,coincidences\n"


class TestConfig:
    def test_defaults(self):
        cfg = RunConfig()
        assert cfg.periods == 100 and cfg.period_s == 1.0
        assert cfg.apparatus() == ApparatusParams()

    def test_parse(self):
        cfg = parse_config("# comment\nseed = 7\nmode_overlap = 1.0  # trailing\n\nformat = json\n")
        assert (cfg.seed, cfg.mode_overlap, cfg.format) == (7, 1.0, "json")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="line 2: unknown key 'mode_overlpa'"):
            parse_config("seed = 1\nmode_overlpa = 0.9\n")

    def test_bad_value(self):
        with pytest.raises(ConfigError, match="periods expects int"):
            parse_config("periods = many\n")

    def test_missing_equals(self):
        with pytest.raises(ConfigError):
            parse_config("seed 3\n")

    def test_duplicate(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("seed = 1\nseed = 2\n")

    @pytest.mark.parametrize("text", ["periods = 0", "periods = 1000001", "eta1 = 1.5",
                                      "format = xml", "transmittance = 1"])
    def test_invariants(self, text):
        with pytest.raises(ConfigError):
            parse_config(text)

    def test_roundtrip(self, tmp_path):
        cfg = RunConfig(seed=3, mode_overlap=0.98, output_dir="x/y")
        path = tmp_path / "run.cfg"
        path.write_text(format_config(cfg), encoding="utf-8")
        assert load_config(path) == cfg

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="nope.cfg"):
            load_config(tmp_path / "nope.cfg")


class TestCounts:
    def _series(self):
        prep = Preparation.mixed_pair(0.3, 0.7, Mixing.PER_PERIOD_COMPONENT)
        return run_measurement(ApparatusParams(), prep, 25, RngStream(4))

    def test_roundtrip(self, tmp_path):
        s = self._series()
        path = emit_counts(s, tmp_path / "counts.csv")
        back = ingest_counts(path)
        assert back.dip == s.dip and back.shoulder == s.shoulder
        assert estimate.overlap_estimate(back) == estimate.overlap_estimate(s)

    def test_bytes(self):
        text = format_counts(self._series())
        assert text.startswith(HEADER)
        assert "\r" not in text
        assert text.count("\n") == 51

    def test_negative_count(self):
        text = HEADER + "0,0.0,1.0,5\n0,200.0,1.0,-3\n"
        with pytest.raises(CountsParseError, match="line 3") as info:
            parse_counts(text)
        assert info.value.line == 3 and info.value.column == "coincidences"

    def test_non_integer_count(self):
        with pytest.raises(CountsParseError, match="line 2, column 'coincidences'"):
            parse_counts(HEADER + "0,0.0,1.0,2.5\n")

    def test_bad_duration(self):
        with pytest.raises(CountsParseError, match="duration_s"):
            parse_counts(HEADER + "0,0.0,0,4\n")

    def test_missing_column(self):
        with pytest.raises(CountsParseError, match="missing columns"):
            parse_counts("period_index,delay_um,coincidences\n0,0,1\n")

    def test_only_shoulder(self):
        with pytest.raises(CountsParseError, match="no dip records"):
            parse_counts(HEADER + "0,200.0,1.0,100\n1,200.0,1.0,98\n")

    def test_stray_delay(self):
        with pytest.raises(CountsParseError, match="line 2"):
            parse_counts(HEADER + "0,50.0,1.0,100\n")

    def test_custom_shoulder_delay(self):
        s = parse_counts(HEADER + "0,0.0,1.0,10\n0,300.0,1.0,100\n", shoulder_delay_um=300.0)
        assert estimate.overlap_estimate(s).value == pytest.approx(0.9)

    def test_file_error_names_path(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(HEADER + "0,0.0,1.0,x\n", encoding="utf-8")
        with pytest.raises(CountsParseError, match="bad.csv") as info:
            ingest_counts(path)
        assert info.value.line == 2
