#pragma once

#include "stase/analysis.hpp"
#include "stase/audio_buffer.hpp"
#include "stase/banks.hpp"
#include "stase/conductor.hpp"
#include "stase/config.hpp"
#include "stase/dsp.hpp"
#include "stase/error.hpp"
#include "stase/prompt.hpp"
#include "stase/remote_backend.hpp"
#include "stase/renderer.hpp"
#include "stase/scene.hpp"
#include "stase/template_bank.hpp"
#include "stase/text.hpp"
#include "stase/wav.hpp"
