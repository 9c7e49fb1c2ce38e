#pragma once

#include "reintel/corpus.hpp"
#include "reintel/cv_ensemble.hpp"
#include "reintel/encoders.hpp"
#include "reintel/error.hpp"
#include "reintel/fusion.hpp"
#include "reintel/io.hpp"
#include "reintel/metrics.hpp"
#include "reintel/pipeline.hpp"
#include "reintel/preprocess.hpp"
#include "reintel/synthetic.hpp"
#include "reintel/unicode.hpp"
