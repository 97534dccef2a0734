#include "offtarget/batch.hpp"

#include <algorithm>
#include <stdexcept>

namespace offtarget {

std::size_t Batch::target_tokens() const {
  std::size_t n = 0;
  for (int b = 0; b < size; ++b)
    for (int t = 0; t < dec_lengths[static_cast<std::size_t>(b)]; ++t)
      if (dec_tgt(b, t) != Specials::kPad) ++n;
  return n;
}

Batch make_batch(std::span<const TaggedExample> examples, std::span<const Direction> directions) {
  if (examples.empty()) throw std::invalid_argument("empty batch");
  if (!directions.empty() && directions.size() != examples.size())
    throw std::invalid_argument("batch metadata size mismatch");
  Batch batch;
  batch.size = static_cast<int>(examples.size());
  for (const auto& ex : examples) {
    if (ex.encoder_input.empty() || ex.decoder_input.empty())
      throw std::invalid_argument("empty sequence in batch");
    if (ex.decoder_input.size() != ex.decoder_target.size())
      throw std::invalid_argument("decoder input and target lengths differ");
    batch.enc_len = std::max(batch.enc_len, static_cast<int>(ex.encoder_input.size()));
    batch.dec_len = std::max(batch.dec_len, static_cast<int>(ex.decoder_input.size()));
  }
  const auto n = static_cast<std::size_t>(batch.size);
  batch.encoder_input.assign(n * static_cast<std::size_t>(batch.enc_len), Specials::kPad);
  batch.decoder_input.assign(n * static_cast<std::size_t>(batch.dec_len), Specials::kPad);
  batch.decoder_target.assign(n * static_cast<std::size_t>(batch.dec_len), Specials::kPad);
  for (std::size_t b = 0; b < n; ++b) {
    const auto& ex = examples[b];
    std::copy(ex.encoder_input.begin(), ex.encoder_input.end(),
              batch.encoder_input.begin() + static_cast<std::ptrdiff_t>(b * static_cast<std::size_t>(batch.enc_len)));
    std::copy(ex.decoder_input.begin(), ex.decoder_input.end(),
              batch.decoder_input.begin() + static_cast<std::ptrdiff_t>(b * static_cast<std::size_t>(batch.dec_len)));
    std::copy(ex.decoder_target.begin(), ex.decoder_target.end(),
              batch.decoder_target.begin() + static_cast<std::ptrdiff_t>(b * static_cast<std::size_t>(batch.dec_len)));
    batch.enc_lengths.push_back(static_cast<int>(ex.encoder_input.size()));
    batch.dec_lengths.push_back(static_cast<int>(ex.decoder_input.size()));
  }
  batch.directions.assign(directions.begin(), directions.end());
  return batch;
}

}  // namespace offtarget
