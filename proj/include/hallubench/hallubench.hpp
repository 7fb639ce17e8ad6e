/// @file hallubench.hpp
/// @brief Umbrella header.
#pragma once

#include "hallubench/errors.hpp"
#include "hallubench/hashing.hpp"
#include "hallubench/text.hpp"
#include "hallubench/model.hpp"
#include "hallubench/jsonl.hpp"
#include "hallubench/concurrency.hpp"
#include "hallubench/prompts.hpp"
#include "hallubench/provider.hpp"
#include "hallubench/http_transport.hpp"
#include "hallubench/mock.hpp"
#include "hallubench/quality.hpp"
#include "hallubench/vecmath.hpp"
#include "hallubench/pipeline.hpp"
#include "hallubench/metrics.hpp"
#include "hallubench/detection.hpp"
#include "hallubench/semantic.hpp"
#include "hallubench/corpus.hpp"
#include "hallubench/stats.hpp"
#include "hallubench/orchestrator.hpp"
