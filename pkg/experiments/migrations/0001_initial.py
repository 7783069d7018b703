# Generated by Django 5.2.6 on 2026-10-18 09:12

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('experiment', models.CharField(choices=[('mnist', 'MNIST digits'), ('validate', 'Random-vector validation'), ('calibrate', 'Instrument calibration')], max_length=20)),
                ('seed', models.BigIntegerField(blank=True, null=True)),
                ('noise', models.BooleanField(default=True)),
                ('n_vectors', models.PositiveIntegerField(default=0, help_text='Classified (analyte, trial) pairs')),
                ('n_correct', models.PositiveIntegerField(default=0)),
                ('accuracy', models.FloatField(blank=True, null=True)),
                ('n_transfers', models.PositiveIntegerField(default=0)),
                ('n_tips', models.PositiveIntegerField(default=0)),
                ('est_time_min', models.FloatField(default=0.0, help_text='Estimated robot time in minutes')),
                ('out_dir', models.CharField(blank=True, max_length=500)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Experiment Run',
                'verbose_name_plural': 'Experiment Runs',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='ClassificationRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('trial', models.CharField(help_text='Trial number, or classifier/image for MNIST', max_length=50)),
                ('analyte', models.PositiveIntegerField()),
                ('expected_z', models.FloatField(help_text='Electronic differential in mg/mL')),
                ('measured_z', models.FloatField(help_text='Chemical differential in mg/mL')),
                ('expected_label', models.CharField(choices=[('match', 'Match'), ('mismatch', 'Mismatch')], max_length=10)),
                ('measured_label', models.CharField(choices=[('match', 'Match'), ('mismatch', 'Mismatch')], max_length=10)),
                ('correct', models.BooleanField(default=False)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='records', to='experiments.experimentrun')),
            ],
            options={
                'verbose_name': 'Classification Record',
                'verbose_name_plural': 'Classification Records',
                'ordering': ['run', 'id'],
            },
        ),
    ]
