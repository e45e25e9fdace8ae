use super::config::{ExperimentSpec, TrainConfig};
use super::eval::dataset_inputs;
use super::train::{train_network, EpochLog, TrainSummary};
use crate::error::Result;
use crate::taxonomy::ConceptVocabulary;
use crate::tinynet::Network;
use crate::wordgen::{build_dataset, Dataset, Split};

/// Mines the vocabulary and renders the dataset of an experiment.
pub fn prepare(spec: &ExperimentSpec) -> Result<(ConceptVocabulary, Dataset)> {
    spec.validate()?;
    let vocab = spec.vocabulary()?;
    let dataset = build_dataset(&vocab, &spec.dataset_config())?;
    Ok((vocab, dataset))
}

#[derive(Debug, Clone)]
pub struct TrainingRun {
    pub net: Network<f32>,
    pub summary: TrainSummary,
    /// `(e, net)`: the network after `e` epochs, for every decay boundary `e`.
    pub snapshots: Vec<(usize, Network<f32>)>,
}

/// Trains `net` on the training split of `dataset`.
pub fn run_training(
    mut net: Network<f32>,
    dataset: &Dataset,
    cfg: &TrainConfig,
    mut progress: impl FnMut(&EpochLog),
) -> Result<TrainingRun> {
    let images = dataset_inputs(dataset, &dataset.indices(Split::Train));
    run_training_on(&mut net, &images, cfg, &mut progress).map(|(summary, snapshots)| TrainingRun {
        net,
        summary,
        snapshots,
    })
}

type Snapshots = Vec<(usize, Network<f32>)>;

pub(crate) fn run_training_on(
    net: &mut Network<f32>,
    images: &[crate::embed::ImageInput<'_>],
    cfg: &TrainConfig,
    progress: &mut impl FnMut(&EpochLog),
) -> Result<(TrainSummary, Snapshots)> {
    let boundaries = cfg.decay_boundaries();
    let mut snapshots = Vec::new();
    let summary = train_network(net, images, cfg, |log, net| {
        progress(log);
        if boundaries.contains(&(log.epoch + 1)) {
            snapshots.push((log.epoch + 1, net.clone()));
        }
        Ok(())
    })?;
    Ok((summary, snapshots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{crop_robustness, TaskKind};
    use crate::tinynet::encode_checkpoint;

    fn small_spec() -> ExperimentSpec {
        let mut spec = ExperimentSpec::desk(11);
        spec.per_word = 3;
        spec.val_replicas = 1;
        spec.train.epochs = 3;
        spec.train.lr_decay_period = Some(1);
        spec.eval.tasks = vec![TaskKind::ImageToConcept];
        spec
    }

    #[test]
    fn training_is_reproducible_with_snapshots() {
        let spec = small_spec();
        let (_, ds) = prepare(&spec).unwrap();
        let run = || {
            let net = Network::init(&spec.net_spec(8).unwrap(), spec.train.seed).unwrap();
            run_training(net, &ds, &spec.train, |_| ()).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(encode_checkpoint(&a.net).unwrap(), encode_checkpoint(&b.net).unwrap());
        assert_eq!(a.summary, b.summary);
        let at: Vec<usize> = a.snapshots.iter().map(|s| s.0).collect();
        assert_eq!(at, vec![1, 2]);
        assert_eq!(a.summary.epochs.len(), 3);
    }

    #[test]
    fn uncropped_ratios_are_exactly_one() {
        let spec = small_spec();
        let (_, ds) = prepare(&spec).unwrap();
        let net = Network::<f32>::init(&spec.net_spec(8).unwrap(), 2).unwrap();
        let images: Vec<_> = ds
            .indices(Split::Val)
            .into_iter()
            .map(|i| (ds.records[i].id, &ds.images[i]))
            .collect();
        let r = crop_robustness(&net, &images, 0.0, 5).unwrap();
        assert_eq!(r.min_retained_fraction, 1.0);
        assert_eq!(r.ratios.len(), 2);
        for m in &r.ratios {
            assert_eq!(m.ratio, Some(1.0), "{}", m.task);
        }
        let again = crop_robustness(&net, &images, 0.2, 5).unwrap();
        assert_eq!(again, crop_robustness(&net, &images, 0.2, 5).unwrap());
        assert!(again.min_retained_fraction >= 0.64);
    }
}
