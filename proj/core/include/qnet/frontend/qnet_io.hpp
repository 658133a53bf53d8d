// SPDX-FileCopyrightText: © 2026 The qnet authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "qnet/frontend/qnet.hpp"

namespace qnet::frontend {

inline constexpr int kQNetFormatVersion = 1;

/// Writes the QNet as a manifest extension: the float manifest header and
/// layer fields plus per-layer quantization blocks (specs, activation,
/// requantization tables) and integer blobs (u8 or i8 weights, i32 biases).
void save_qnet(const QNetModel& model, const std::filesystem::path& manifest_path);

/// Reads a QNet written by save_qnet; load(save(m)) == m.
QNetModel load_qnet(const std::filesystem::path& manifest_path);

} // namespace qnet::frontend
