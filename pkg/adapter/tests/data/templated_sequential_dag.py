# Generated by: templated_dag_generator
# Source YAML: workflow.yaml
# Generated at: 2025-01-01T00:00:00.000000
#==============================================================================

from airflow import DAG
from airflow.providers.docker.operators.docker import DockerOperator
from docker.types import Mount
import os
from datetime import datetime, timedelta

host_data_dir = os.getenv('HOST_DATA_DIR', '/tmp/airflow_data')
container_data_dir = '/app/data'

default_args = {
    'owner': 'airflow',
    'depends_on_past': False,
    'email_on_failure': False,
    'email_on_retry': False,
    'retries': 1,
    'retry_delay': timedelta(minutes=5),
}

with DAG(
    dag_id='load_and_modify_data_analysis',
    default_args=default_args,
    description=(
        'Sequential five-step marketing enrichment pipeline that loads '
        'CSV data, reconciles city names, adds weather attributes and '
        'saves the result.'
    ),
    schedule_interval=None,
    start_date=datetime(2024, 1, 1),
    catchup=False,
) as dag:

    load_and_modify_data = DockerOperator(
        task_id='load_and_modify_data',
        image='i2t-backendwithintertwino6-load-and-modify:latest',
        command=['python', '/app/scripts/load_and_modify_data.py'],
        environment={
            'DATA_DIR': os.getenv('DATA_DIR', None),
            'DATASET_ID': os.getenv('DATASET_ID', 2),
            'DATE_COLUMN': os.getenv('DATE_COLUMN', 'Fecha_id'),
            'TABLE_NAME_PREFIX': os.getenv('TABLE_NAME_PREFIX', 'JOT_'),
        },
        network_mode='app_network',
        mounts=[Mount(source=host_data_dir,
                      target=container_data_dir, type='bind')],
        auto_remove=True,
    )

    data_reconciliation = DockerOperator(
        task_id='data_reconciliation',
        image='i2t-backendwithintertwino6-reconciliation:latest',
        command=['python', '/app/scripts/data_reconciliation.py'],
        environment={
            'DATA_DIR': os.getenv('DATA_DIR', None),
            'PRIMARY_COLUMN': os.getenv('PRIMARY_COLUMN', 'City'),
            'OPTIONAL_COLUMNS': os.getenv(
                'OPTIONAL_COLUMNS', ['County', 'Country']),
            'RECONCILIATOR_ID': os.getenv('RECONCILIATOR_ID', 'geocodingHere'),
            'API_TOKEN': os.getenv('API_TOKEN', None),
        },
        network_mode='app_network',
        mounts=[Mount(source=host_data_dir,
                      target=container_data_dir, type='bind')],
        auto_remove=True,
    )

    openmeteo_data_extension = DockerOperator(
        task_id='openmeteo_data_extension',
        image='i2t-backendwithintertwino6-openmeteo-extension:latest',
        command=['python', '/app/scripts/openmeteo_data_extension.py'],
        environment={
            'DATA_DIR': os.getenv('DATA_DIR', None),
            'WEATHER_ATTRIBUTES': os.getenv(
                'WEATHER_ATTRIBUTES',
                'apparent_temperature_max,apparent_temperature_min,precipi'
                'tation_sum,precipitation_hours'),
            'DATE_SEPARATOR': os.getenv('DATE_SEPARATOR', '-'),
        },
        network_mode='app_network',
        mounts=[Mount(source=host_data_dir,
                      target=container_data_dir, type='bind')],
        auto_remove=True,
    )

    column_extension = DockerOperator(
        task_id='column_extension',
        image='i2t-backendwithintertwino6-column-extension:latest',
        command=['python', '/app/scripts/column_extension.py'],
        environment={
            'DATA_DIR': os.getenv('DATA_DIR', None),
            'EXTENDER_ID': os.getenv('EXTENDER_ID', 'reconciledColumnExt'),
        },
        network_mode='app_network',
        mounts=[Mount(source=host_data_dir,
                      target=container_data_dir, type='bind')],
        auto_remove=True,
    )

    save_final_data = DockerOperator(
        task_id='save_final_data',
        image='i2t-backendwithintertwino6-save:latest',
        command=['python', '/app/scripts/save_final_data.py'],
        environment={
            'DATA_DIR': os.getenv('DATA_DIR', None),
            'OUTPUT_PATTERN': os.getenv(
                'OUTPUT_PATTERN', 'enriched_data_{}.csv'),
        },
        network_mode='app_network',
        mounts=[Mount(source=host_data_dir,
                      target=container_data_dir, type='bind')],
        auto_remove=True,
    )

    # Set dependencies
    load_and_modify_data >> data_reconciliation
    data_reconciliation >> openmeteo_data_extension
    openmeteo_data_extension >> column_extension
    column_extension >> save_final_data
