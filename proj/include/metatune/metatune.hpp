#pragma once

#include "metatune/backend.hpp"
#include "metatune/campaign.hpp"
#include "metatune/dtree.hpp"
#include "metatune/error.hpp"
#include "metatune/features.hpp"
#include "metatune/flags.hpp"
#include "metatune/predict.hpp"
#include "metatune/report.hpp"
#include "metatune/subprocess.hpp"
