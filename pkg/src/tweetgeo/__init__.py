"""tweetgeo: country/city geolocation of short messages from a single record.

A numpy-only implementation of a multi-field convolutional text classifier
fused with categorical features, a stacked multinomial naive-Bayes baseline
(with information-gain-ratio feature selection), geodesic evaluation metrics,
and a deterministic synthetic-corpus generator for desk-scale experiments.
"""

from .bayes import (MnbModel, StackModel, fit_mnb, fit_stacking, igr_score,
                    posterior_mnb, predict_mnb, predict_stacking, select_top_percent)
from .cnn import (CnnConfig, CnnModel, FeatureBatch, backward, conv_maxpool,
                  encode_features, field_matrix, forward, init_model,
                  load_pretrained_embeddings, predict_proba)
from .encode import CategoryMaps, build_category_maps, onehot_block, time_slot
from .errors import BundleError, DataError
from .geo import (City, CityTable, aggregate_cities, haversine_km,
                  load_city_table, nearest_city, save_city_table)
from .ingest import (Record, SplitSpec, StatsReport, dataset_stats,
                     dedup_user_city, parse_record, read_jsonl,
                     resolve_coordinates, split_by_user, write_jsonl)
from .labels import LabelTable, city_labels, country_labels
from .metrics import (Prediction, acc_at_161, acc_top5, accuracy,
                      calibration_bins, median_error_km, per_class_pr, ranked_top5)
from .nncore import (AdamState, adam_step, cross_entropy, dropout, relu,
                     softmax, softmax_xent_backward)
from .synth import SynthSpec, generate, write_corpus
from .textproc import Vocabulary, build_vocab, encode_tokens, load_vocab, save_vocab, tokenize
from .train import (CnnBundle, StackBundle, TrainConfig, TrainResult,
                    load_model, load_stack_model, save_model, save_stack_model, train)

__version__ = "0.1.0"
