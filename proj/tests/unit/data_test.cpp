#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "learnafe/data/augment.hpp"
#include "learnafe/data/corpus.hpp"
#include "learnafe/data/wav.hpp"
#include "learnafe/dsp/fft.hpp"
#include "oracles.hpp"

using namespace learnafe;
using namespace learnafe::data;
namespace fs = std::filesystem;

TEST(Wav, FullScaleRoundTrip) {
  const std::vector<double> in = {0.0, 32767.0 / 32768.0, -1.0, 0.5, 1.5, -2.0};
  const auto bytes = encode_wav(in, 16000);
  const auto w = parse_wav(bytes);
  EXPECT_EQ(w.sample_rate, 16000u);
  ASSERT_EQ(w.samples.size(), in.size());
  EXPECT_EQ(w.samples[1], 32767.0 / 32768.0);
  EXPECT_EQ(w.samples[2], -1.0);
  EXPECT_EQ(w.samples[3], 0.5);
  EXPECT_EQ(w.samples[4], 32767.0 / 32768.0);
  EXPECT_EQ(w.samples[5], -1.0);
}

TEST(Wav, RejectsUnsupportedFormats) {
  const std::vector<double> in(100, 0.1);
  EXPECT_THROW(parse_wav(encode_wav(in, 16000, 2)), FormatError);
  EXPECT_THROW(parse_wav(encode_wav(in, 16000, 1, 8)), FormatError);
  auto bytes = encode_wav(in, 16000);
  bytes.resize(20);
  EXPECT_THROW(parse_wav(bytes), FormatError);
  EXPECT_THROW(load_wav("/nonexistent.wav"), FormatError);
}

TEST(Resampler, LengthAndDc) {
  const std::vector<double> dc(16000, 0.25);
  const auto y = resample_16k_to_20k(dc);
  EXPECT_EQ(y.size(), 20000u);
  for (std::size_t i = 200; i + 200 < y.size(); ++i) EXPECT_NEAR(y[i], 0.25, 1e-6) << i;
}

TEST(Resampler, TonePeakLandsOnBin) {
  const auto x = oracle::tone(16000, 1000.0, 16000.0);
  const auto y = resample_16k_to_20k(x);
  std::vector<std::complex<double>> spec(y.size() / 2 + 1);
  dsp::rfft(y, spec);
  std::size_t peak = 1;
  for (std::size_t k = 1; k < spec.size(); ++k) {
    if (std::abs(spec[k]) > std::abs(spec[peak])) peak = k;
  }
  const double expected = 1000.0 * static_cast<double>(y.size()) / 20000.0;
  EXPECT_NEAR(static_cast<double>(peak), expected, 1.0);
  EXPECT_NEAR(oracle::tone_amplitude(y, 1000.0, 20000.0, 2000, 18000), 1.0, 1e-3);
}

TEST(Crop, OffsetRangeAndCenter) {
  std::vector<double> ramp(kClipSamples);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i + 1);
  EXPECT_EQ(max_crop_offset(kClipSamples), 4000u);
  Rng rng(1);
  const auto c = pad_and_crop(ramp, rng, CropMode::Center);
  ASSERT_EQ(c.size(), kClipSamples);
  EXPECT_EQ(c[0], 1.0);
  EXPECT_EQ(c.back(), static_cast<double>(kClipSamples));
  const std::vector<double> half(kClipSamples / 2, 1.0);
  const auto hc = pad_and_crop(half, rng, CropMode::Center);
  EXPECT_EQ(hc[kPadSamples - 1], 0.0);
  EXPECT_EQ(hc[kPadSamples], 1.0);
  EXPECT_EQ(hc[kPadSamples + kClipSamples / 2], 0.0);
  std::size_t lo = 4000, hi = 0;
  for (int k = 0; k < 2000; ++k) {
    const auto r = pad_and_crop(ramp, rng);
    ASSERT_EQ(r.size(), kClipSamples);
    // offset = 2000 - (index of ramp[0]) when the ramp start is visible
    std::size_t off;
    if (r[0] == 0.0) {
      std::size_t first = 0;
      while (r[first] == 0.0) ++first;
      off = 2000 - first;
    } else {
      off = 2000 + static_cast<std::size_t>(r[0]) - 1;
    }
    lo = std::min(lo, off);
    hi = std::max(hi, off);
  }
  EXPECT_LE(hi, 4000u);
  EXPECT_LT(lo, 40u);
  EXPECT_GT(hi, 3960u);
  const std::vector<double> short_clip(1000, 1.0);
  EXPECT_EQ(pad_and_crop(short_clip, rng).size(), kClipSamples);
}

TEST(Mixing, SnrIsExact) {
  const auto clean = oracle::white_noise(5000, 1, 0.3);
  const auto noise = oracle::white_noise(5000, 2, 1.7);
  for (double snr : {0.0, 10.0, -5.0, 20.0}) {
    const auto mixed = mix_noise_at_snr(clean, noise, snr);
    const double g = noise_gain_for_snr(clean, noise, snr);
    std::vector<double> residual(mixed.size());
    for (std::size_t i = 0; i < mixed.size(); ++i) residual[i] = mixed[i] - clean[i];
    EXPECT_NEAR(10 * std::log10(mean_power(clean) / mean_power(residual)), snr, 1e-9);
    EXPECT_NEAR(g * g * mean_power(noise), mean_power(clean) / std::pow(10.0, snr / 10), 1e-12);
  }
  EXPECT_DOUBLE_EQ(noise_gain_for_snr(clean, noise, 500.0), noise_gain_for_snr(clean, noise, 100.0));
  EXPECT_THROW(mix_noise_at_snr(clean, std::vector<double>(10, 1.0), 5.0), DomainError);
}

TEST(Mixing, MeanPower) {
  EXPECT_EQ(mean_power(std::vector<double>{}), 0.0);
  EXPECT_DOUBLE_EQ(mean_power(std::vector<double>{1.0, -3.0}), 5.0);
}

TEST(ClassMapping, Ids) {
  const ClassMap m;
  EXPECT_EQ(m.label_of("yes"), 2);
  EXPECT_EQ(m.label_of("go"), 11);
  EXPECT_EQ(m.label_of("bed"), ClassMap::kUnknown);
  EXPECT_EQ(m.label_of("_silence_"), ClassMap::kSilence);
  for (int id = 0; id < static_cast<int>(kNumClasses); ++id) EXPECT_EQ(m.id_of_name(m.name(id)), id);
  EXPECT_THROW(m.id_of_name("marvin"), FormatError);
  EXPECT_THROW(m.name(12), DomainError);
}

TEST(Splits, MatchesReferenceHash) {
  EXPECT_EQ(which_set("0a7c2a8d_nohash_0.wav"), Split::Train);
  EXPECT_EQ(which_set("0a7c2a8d_nohash_3.wav"), Split::Train);
  EXPECT_EQ(which_set("yes/0a7c2a8d_nohash_3.wav"), Split::Train);
  EXPECT_EQ(which_set("1b4c9b89_nohash_2.wav"), Split::Test);
  EXPECT_EQ(which_set("9a69672b_nohash_1.wav"), Split::Test);
  EXPECT_EQ(which_set("00000000_nohash_0.wav"), Split::Validation);
  EXPECT_EQ(which_set("bird_test.wav"), Split::Train);
  EXPECT_EQ(which_set("c1d39ce8_nohash_0.wav"), Split::Train);
  // 56.84% lands in test once the first two buckets cover it
  EXPECT_EQ(which_set("0a7c2a8d_nohash_0.wav", 50.0, 10.0), Split::Test);
}

TEST(Splits, SpeakerTakesShareASplit) {
  for (const char* id : {"1b4c9b89", "00000000", "3c257192", "ffd2ba2f"}) {
    const auto s = which_set(std::string(id) + "_nohash_0.wav");
    for (int take = 1; take < 5; ++take) {
      EXPECT_EQ(which_set(std::string(id) + "_nohash_" + std::to_string(take) + ".wav"), s);
    }
  }
}

TEST(Manifest, RoundTripAndScan) {
  const auto root = fs::temp_directory_path() / "learnafe_corpus_test";
  fs::remove_all(root);
  const std::vector<double> tone = oracle::tone(8000, 440.0, 16000.0);
  for (const char* word : {"yes", "no", "bed"}) {
    fs::create_directories(root / word);
    write_wav((root / word / "1b4c9b89_nohash_0.wav").string(), tone, 16000);
    write_wav((root / word / "0a7c2a8d_nohash_0.wav").string(), tone, 16000);
  }
  fs::create_directories(root / "_background_noise_");
  write_wav((root / "_background_noise_" / "white.wav").string(), oracle::white_noise(32000, 3, 0.1),
            16000);
  const ClassMap classes;
  const auto m = scan_corpus(root.string(), classes);
  EXPECT_EQ(m.entries.size(), 6u);
  EXPECT_EQ(m.of(Split::Test).size(), 3u);
  std::stringstream s;
  write_manifest(s, m, classes);
  const auto back = read_manifest(s, classes);
  ASSERT_EQ(back.entries.size(), m.entries.size());
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].path, m.entries[i].path);
    EXPECT_EQ(back.entries[i].label, m.entries[i].label);
    EXPECT_EQ(back.entries[i].split, m.entries[i].split);
  }
  const auto noise = NoiseBank::load_directory((root / "_background_noise_").string());
  ASSERT_EQ(noise.size(), 1u);
  EXPECT_EQ(noise.recording(0).size(), 40000u);
  CorpusSource train(root.string(), m, Split::Train, noise, 1);
  EXPECT_GT(train.size(), 0u);
  const auto clip = eval_clip(train, 0, 5);
  EXPECT_EQ(clip.samples.size(), kClipSamples);
  std::istringstream junk("yes/a.wav\tyes\n");
  EXPECT_THROW(read_manifest(junk, classes), FormatError);
  EXPECT_THROW(scan_corpus((root / "missing").string(), classes), FormatError);
  fs::remove_all(root);
}

namespace {

SyntheticToneSource small_source(Split split = Split::Train) {
  SyntheticTaskConfig cfg;
  cfg.labels = {ClassMap::kSilence, 2, 3};
  cfg.train_per_class = 20;
  cfg.clip_samples = 4000;
  return SyntheticToneSource(cfg, split, NoiseBank::synthetic(7, 2, 20000));
}

}  // namespace

TEST(Augment, MixProbability) {
  const auto src = small_source();
  std::size_t mixed = 0, draws = 0;
  for (std::uint64_t s = 0; draws < 10000; ++s) {
    for (std::size_t i = 0; i < src.size() && draws < 10000; ++i) {
      if (src.label(i) == ClassMap::kSilence) continue;
      const auto c = training_clip(src, i, derive_seed(s, i));
      ++draws;
      if (c.noise_mixed) {
        ++mixed;
        EXPECT_GE(c.snr_db, 5.0);
        EXPECT_LE(c.snr_db, 20.0);
      }
    }
  }
  const double frac = static_cast<double>(mixed) / static_cast<double>(draws);
  EXPECT_GE(frac, 0.78);
  EXPECT_LE(frac, 0.82);
}

TEST(Augment, SilenceIsScaledNoise) {
  const auto src = small_source();
  double max_noise = 0;
  for (std::size_t r = 0; r < src.noise().size(); ++r) {
    for (double v : src.noise().recording(r)) max_noise = std::max(max_noise, std::abs(v));
  }
  std::size_t seen = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src.label(i) != ClassMap::kSilence) continue;
    EXPECT_TRUE(src.utterance(i).empty());
    const auto c = training_clip(src, i, 11 + i);
    EXPECT_EQ(c.samples.size(), 4000u);
    for (double v : c.samples) EXPECT_LE(std::abs(v), max_noise);
    ++seen;
  }
  EXPECT_GT(seen, 0u);
}

TEST(Augment, DeterministicClipsAndOrder) {
  const auto src = small_source();
  EXPECT_EQ(training_clip(src, 5, 99).samples, training_clip(src, 5, 99).samples);
  EXPECT_NE(training_clip(src, 5, 99).samples, training_clip(src, 5, 100).samples);
  const auto a = eval_clip(src, 5, 3, 5.0), b = eval_clip(src, 5, 3, 20.0);
  const auto clean = eval_clip(src, 5, 3);
  // same noise segment at every SNR
  std::vector<double> na(a.samples.size()), nb(a.samples.size());
  for (std::size_t t = 0; t < na.size(); ++t) {
    na[t] = a.samples[t] - clean.samples[t];
    nb[t] = b.samples[t] - clean.samples[t];
  }
  const double ratio = std::sqrt(mean_power(na) / mean_power(nb));
  for (std::size_t t = 0; t < na.size(); t += 97) EXPECT_NEAR(na[t], ratio * nb[t], 1e-9);
  auto order = epoch_order(50, 1, 0);
  EXPECT_EQ(order, epoch_order(50, 1, 0));
  EXPECT_NE(order, epoch_order(50, 1, 1));
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(order[i], i);
}

TEST(Synthetic, SplitsAreDisjointAndBalanced) {
  const auto train = small_source(Split::Train), val = small_source(Split::Validation);
  EXPECT_EQ(train.size(), 60u);
  EXPECT_EQ(val.size(), 120u);
  EXPECT_NE(train.utterance(1), val.utterance(1));
  std::vector<int> counts(kNumClasses, 0);
  for (std::size_t i = 0; i < train.size(); ++i) ++counts[train.label(i)];
  EXPECT_EQ(counts[0], 20);
  EXPECT_EQ(counts[2], 20);
  EXPECT_EQ(counts[3], 20);
}
