from .measure import (Measure, StepDistribution, convolve, convolve_exact, convolve_series,
                      mixture, sn_delta_member, translate_measure, tv_distance, uniform)
from .simulate import (WalkTrace, local_time, local_time_event_probability, sample_walk,
                       speed_estimate)
