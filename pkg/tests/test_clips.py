from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from proviq.clips import SourceVideo, clip_len, full_clip, sample_uniform, trim
from proviq.errors import InvalidArgument


def video(frame_count, fps=30) -> SourceVideo:
    return SourceVideo(video_id="v", fps=Fraction(fps), frame_count=frame_count)


class TestSampleUniform:
    def test_sixty_of_six_hundred(self):
        clip = sample_uniform(video(600), 60)
        assert clip.indices() == list(range(0, 600, 10))
        assert (clip.start, clip.end) == (0, 600)

    def test_short_video_dedups(self):
        clip = sample_uniform(video(5), 60)
        assert clip.indices() == [0, 1, 2, 3, 4]

    def test_seven_of_three(self):
        # floor(i * 7 / 3) for i = 0, 1, 2
        assert sample_uniform(video(7), 3).indices() == [0, 2, 4]

    def test_zero_rejected(self):
        with pytest.raises(InvalidArgument):
            sample_uniform(video(10), 0)

    @given(frame_count=st.integers(1, 500), n=st.integers(1, 200))
    def test_deterministic_increasing_in_range(self, frame_count, n):
        a = sample_uniform(video(frame_count), n).indices()
        b = sample_uniform(video(frame_count), n).indices()
        assert a == b
        assert all(x < frame_count for x in a)
        assert all(x < y for x, y in zip(a, a[1:]))
        assert len(a) == min(n, frame_count)


class TestTrim:
    def test_first_quarter(self):
        clip = full_clip(video(600))
        out = trim(clip, 0, 150)
        assert out.num_frames == 150
        assert out.indices() == list(range(150))

    def test_identity(self):
        clip = sample_uniform(video(40), 10)
        assert trim(clip, 0, clip.num_frames).indices() == clip.indices()

    def test_positions_not_source_indices(self):
        clip = sample_uniform(video(40), 4)  # frames at 0, 10, 20, 30
        assert clip.indices() == [0, 10, 20, 30]
        out = trim(clip, 1, 3)
        assert out.indices() == [10, 20]
        assert (out.start, out.end) == (10, 21)

    def test_out_of_range(self):
        clip = full_clip(video(10))
        with pytest.raises(InvalidArgument):
            trim(clip, 0, 11)
        with pytest.raises(InvalidArgument):
            trim(clip, 5, 4)

    def test_empty_result_is_legal(self):
        clip = full_clip(video(10))
        out = trim(clip, 3, 3)
        assert out.num_frames == 0
        assert out.start == out.end

    @given(data=st.data())
    def test_nesting(self, data):
        count = data.draw(st.integers(1, 60))
        clip = full_clip(video(count))
        a = data.draw(st.integers(0, count))
        d = data.draw(st.integers(a, count))
        c = data.draw(st.integers(a, d))
        d2 = data.draw(st.integers(c, d))
        inner = trim(trim(clip, a, d), c - a, d2 - a)
        assert inner.indices() == trim(clip, c, d2).indices()


class TestClipLen:
    def test_basic(self):
        assert clip_len(full_clip(video(60))) == 60
        c = full_clip(video(10))
        assert clip_len(trim(c, 3, 3)) == 0
        assert clip_len(trim(c, 2, 5)) == 3

    @given(count=st.integers(1, 100), data=st.data())
    def test_trim_length_law(self, count, data):
        clip = full_clip(video(count))
        a = data.draw(st.integers(0, count))
        b = data.draw(st.integers(a, count))
        assert clip_len(trim(clip, a, b)) == b - a


def test_timestamps_are_exact_rationals():
    v = SourceVideo(video_id="v", fps=Fraction(30000, 1001), frame_count=100)
    f = v.frame(77)
    assert f.timestamp_s == Fraction(77 * 1001, 30000)
    assert v.duration_s == Fraction(100 * 1001, 30000)


def test_immutable_values():
    clip = full_clip(video(5))
    with pytest.raises(AttributeError):
        clip.start = 3  # type: ignore[misc]
