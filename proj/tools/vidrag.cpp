// Copyright 2026 The vidrag Authors
// SPDX-License-Identifier: Apache-2.0

#include "vidrag/cli.hpp"

int main(int argc, char** argv) { return vidrag::run_cli(argc, argv); }
