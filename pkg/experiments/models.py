from django.db import models, transaction

from perceptron.classifiers import ClassLabel


class ExperimentRun(models.Model):
    EXPERIMENT_CHOICES = [
        ('mnist', 'MNIST digits'),
        ('validate', 'Random-vector validation'),
        ('calibrate', 'Instrument calibration'),
    ]

    experiment = models.CharField(max_length=20, choices=EXPERIMENT_CHOICES)
    seed = models.BigIntegerField(blank=True, null=True)
    noise = models.BooleanField(default=True)

    # Outcome
    n_vectors = models.PositiveIntegerField(default=0, help_text="Classified (analyte, trial) pairs")
    n_correct = models.PositiveIntegerField(default=0)
    accuracy = models.FloatField(blank=True, null=True)

    # Cost
    n_transfers = models.PositiveIntegerField(default=0)
    n_tips = models.PositiveIntegerField(default=0)
    est_time_min = models.FloatField(default=0.0, help_text="Estimated robot time in minutes")

    out_dir = models.CharField(max_length=500, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['-created_at']
        verbose_name = "Experiment Run"
        verbose_name_plural = "Experiment Runs"

    def __str__(self):
        return f"{self.experiment} seed {self.seed} ({self.n_correct}/{self.n_vectors})"

    @classmethod
    def record(cls, report, out_dir=''):
        """Store a report and its classification rows in one transaction"""
        rows = report.ledger_rows()
        n_correct = sum(1 for row in rows if row['correct'])
        cost = getattr(report, 'cost', None)
        with transaction.atomic():
            run = cls.objects.create(
                experiment=report.experiment,
                seed=report.seed,
                noise=bool(report.noise),
                n_vectors=len(rows),
                n_correct=n_correct,
                accuracy=n_correct / len(rows) if rows else None,
                n_transfers=cost.n_transfers if cost else 0,
                n_tips=cost.n_tips if cost else 0,
                est_time_min=cost.est_time_min if cost else 0.0,
                out_dir=str(out_dir),
            )
            ClassificationRecord.objects.bulk_create(
                ClassificationRecord(run=run, **row) for row in rows
            )
        return run


class ClassificationRecord(models.Model):
    run = models.ForeignKey(ExperimentRun, on_delete=models.CASCADE, related_name='records')
    trial = models.CharField(max_length=50, help_text="Trial number, or classifier/image for MNIST")
    analyte = models.PositiveIntegerField()
    expected_z = models.FloatField(help_text="Electronic differential in mg/mL")
    measured_z = models.FloatField(help_text="Chemical differential in mg/mL")
    expected_label = models.CharField(max_length=10, choices=ClassLabel.choices)
    measured_label = models.CharField(max_length=10, choices=ClassLabel.choices)
    correct = models.BooleanField(default=False)

    class Meta:
        ordering = ['run', 'id']
        verbose_name = "Classification Record"
        verbose_name_plural = "Classification Records"

    def __str__(self):
        return f"trial {self.trial} analyte {self.analyte}: {self.measured_label}"
