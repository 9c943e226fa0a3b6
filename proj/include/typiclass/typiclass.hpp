#ifndef TYPICLASS_TYPICLASS_HPP
#define TYPICLASS_TYPICLASS_HPP

#include "typiclass/category.hpp"
#include "typiclass/checksum.hpp"
#include "typiclass/classifier.hpp"
#include "typiclass/corpus.hpp"
#include "typiclass/error.hpp"
#include "typiclass/metrics.hpp"
#include "typiclass/pipeline.hpp"
#include "typiclass/rng.hpp"
#include "typiclass/synthgen.hpp"
#include "typiclass/text.hpp"
#include "typiclass/topic_model.hpp"

#endif  // TYPICLASS_TYPICLASS_HPP
